from .base_model import BaseUrnModel, CoreMatrixModel
from .hyperrecursive import HyperrecursiveTreeModel
