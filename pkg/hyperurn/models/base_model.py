"""
Base Model Class - Defines unified interface for structures encoded as affine urns
"""

from abc import ABC, abstractmethod

import numpy as np

from ..urn_core import UrnSpec, UrnState, new_urn


class BaseUrnModel(ABC):
    """Base class for random structures whose profile evolves as an affine urn"""

    def __init__(self, model_name: str):
        self.model_name = model_name
        self._spec = None

    @abstractmethod
    def core_matrix(self) -> np.ndarray:
        """
        Core matrix of the urn

        Returns:
            np.ndarray: Square integer matrix, row i is the replacement for an all-color-i sample
        """
        pass

    @abstractmethod
    def sample_size(self) -> int:
        """Number of balls drawn per step"""
        pass

    @abstractmethod
    def initial_counts(self) -> np.ndarray:
        """Ball counts before the first draw"""
        pass

    @property
    def tracked_levels(self) -> int:
        """Number of leading coordinates reported to users"""
        return len(self.initial_counts())

    def urn(self) -> UrnSpec:
        """Validated urn specification, built once"""
        if self._spec is None:
            self._spec = new_urn(self.core_matrix(), self.sample_size(), self.initial_counts())
        return self._spec

    def profile(self, state: UrnState) -> np.ndarray:
        """User-facing counts: the first tracked_levels coordinates"""
        return np.asarray(state.x[: self.tracked_levels])


class CoreMatrixModel(BaseUrnModel):
    """Affine urn given directly by its core matrix"""

    def __init__(self, A, s: int, x0):
        super().__init__("core_matrix")
        self._A = np.asarray(A, dtype=np.int64)
        self._s = int(s)
        self._x0 = np.asarray(x0, dtype=np.int64)

    def core_matrix(self) -> np.ndarray:
        return self._A

    def sample_size(self) -> int:
        return self._s

    def initial_counts(self) -> np.ndarray:
        return self._x0
