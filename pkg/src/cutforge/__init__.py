"""cutforge: cutting-plane engine for box-constrained nonconvex QCQPs."""

__version__ = "0.1.0"
