# Wiener-Hopf factorization for meromorphic Levy processes
# Root grids, factor products, supremum distributions and validation

__version__ = "0.1.0"
