# Test package for PyQuadMat
