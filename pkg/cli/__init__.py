# Command line package for PyQuadMat