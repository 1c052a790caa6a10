# Core package for PyQuadMat