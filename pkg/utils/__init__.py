# Utils package for PyQuadMat