# Task engine package for PyQuadMat