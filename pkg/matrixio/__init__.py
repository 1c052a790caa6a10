# Matrix I/O package for PyQuadMat