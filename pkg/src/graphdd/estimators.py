"""Estimator-style wrappers around the embedding strategies.

``fit`` plans gate times for one scheduled circuit; ``transform`` inserts
them.  Parameters follow scikit-learn conventions so the embedders can be
cloned, compared and tuned with ``get_params``/``set_params``.
"""
from __future__ import annotations

import copy

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .oracle import ResidualLedger, compute_residuals
from .pipeline import EmbedConfig, PLANNERS, realize
from .schedule import ScheduleError, find_gaps
from .validation import check_circuit, check_device

__all__ = ["GraphDD", "StandardDD", "NoDD", "NotFittedError"]


class _Embedder(TransformerMixin, BaseEstimator):
    strategy = "none"

    def __init__(self, device=None, max_idle=None, exact=False):
        self.device = device
        self.max_idle = max_idle
        self.exact = exact

    def _config(self) -> EmbedConfig:
        return EmbedConfig(self.strategy, self.max_idle, bool(self.exact))

    def _device(self):
        if self.device is None:
            raise ValueError(f"{type(self).__name__} needs a device")
        return check_device(self.device)

    def fit(self, X, y=None):
        """Plan DD gate times for circuit ``X``; ``y`` is ignored."""
        device = self._device()
        circuit = check_circuit(X, device)
        plan = PLANNERS[self.strategy](circuit, device, self._config())
        self.device_ = device
        self.plan_ = plan
        self.windows_ = list(plan.windows)
        self.graph_ = plan.graph
        self.traversal_ = plan.traversal
        self.stats_ = plan.stats
        self.gaps_ = tuple(find_gaps(circuit))
        self.n_qubits_in_ = circuit.num_qubits
        return self

    def transform(self, X):
        """Insert the planned gates into ``X``, which must match the fitted schedule."""
        check_is_fitted(self, "plan_")
        circuit = check_circuit(X, self.device_)
        if circuit.num_qubits != self.n_qubits_in_ or tuple(find_gaps(circuit)) != self.gaps_:
            raise ScheduleError("circuit idles differ from the circuit seen in fit")
        plan = copy.copy(self.plan_)
        plan.stats = copy.deepcopy(self.plan_.stats)
        out = realize(circuit, plan, self.device_, bool(self.exact))
        self.stats_ = plan.stats
        return out

    def residuals(self, X) -> ResidualLedger:
        """Embed ``X`` and return the residual ledger of the result."""
        return compute_residuals(self.transform(X), self.device_)

    def _more_tags(self):
        return {"X_types": ["categorical"], "stateless": False, "requires_y": False}


class GraphDD(_Embedder):
    """Context-aware embedding that cancels every Z and ZZ integral.

    Parameters
    ----------
    device : DeviceModel, dict or JSON text
    max_idle : int, optional
        Overrides the device's long-idle threshold.
    exact : bool
        Skip quantization; gates become zero-width flips at rational times.

    Attributes
    ----------
    windows_ : list of IdleWindow
        Post-split windows with their flip times.
    graph_, traversal_ : the embedding graph and its BFS plan.
    stats_ : EmbedStats
    """

    strategy = "graphdd"


class StandardDD(_Embedder):
    """Two gates at a quarter and three quarters of every idle."""

    strategy = "standard"


class NoDD(_Embedder):
    strategy = "none"
