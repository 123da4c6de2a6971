# Import views from folder
from .curvature import curvature
from .check import check
from .hopf import hopf_self_similar
