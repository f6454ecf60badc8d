from . import kernels, layers, params
from .params import Adam, NonFiniteLoss, ParamStore

__all__ = ["kernels", "layers", "params", "Adam", "NonFiniteLoss", "ParamStore"]
