"""In-memory floating-point addition on RRAM crossbars, with fault mitigation."""
__version__ = "0.1.0"
