"""Regression-equation generators driven by plant measurements.

Two causal constructions are provided, both built from first-order filter
banks integrated in lockstep with the plant:

* PbepGenerator -- the power-balance regression.  Filtering the balance
  Sdot = -d + s and splitting each of s, S, d into a known-signal part and
  a parameter part gives the scalar regression

      Y = F[b_s - b_d] - sF[b_S]
      Omega = col(-F[phi_s], sF[phi_S], F[phi_d])
      Y = Omega' G(theta)

  with G the stacked nonlinear parameter map.

* StdLreGenerator -- the conventional state-equation regression obtained by
  filtering xdot = (w_f + w_g) Theta + b_f + B_g u_p, yielding the vector
  regression Y = pF[x] - F[b_f + B_g u_p], Omega' = F[w_f + w_g], and
  Y = Omega' Theta with the enlarged (overparameterized) vector
  Theta = C(theta).

Structurally-zero signal maps are declared as None; the generators then
skip the corresponding filter channels entirely and substitute exact zeros
in the assembled outputs.

Samples are produced at every integrator step and consumed synchronously
by the estimators; the generators expose `state`/`state_rate` so the
simulator owns all time stepping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .filters import ChannelMode, FirstOrderFilterBank
from .smallmat import min_eig_symmetric


@dataclass
class ParamMap:
    """Nonlinear parameterization of a scenario.

    Maps G_s, G_S, G_d send the q unknown parameters to the coefficient
    vectors of the supply, storage and dissipation regressions; T is the
    designer-chosen selector and P the symmetric positive-definite metric
    used by the monotone correction flow.
    """

    q: int
    p_s: int
    p_S: int
    p_d: int
    G_s: Optional[Callable[[np.ndarray], np.ndarray]]
    G_S: Optional[Callable[[np.ndarray], np.ndarray]]
    G_d: Optional[Callable[[np.ndarray], np.ndarray]]
    T: np.ndarray
    P: np.ndarray
    jacobian_G: Callable[[np.ndarray], np.ndarray]
    # optional pre-stacked evaluation of col(G_s, G_S, G_d); must agree with
    # the component maps (checked in tests), only used to avoid stacking in
    # hot loops
    G_direct: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=float)
        self.P = np.asarray(self.P, dtype=float)
        p = self.p
        if p < self.q:
            raise ValueError(f"need p >= q, got p={p} q={self.q}")
        if self.T.shape != (self.q, p):
            raise ValueError(f"T has shape {self.T.shape}, expected {(self.q, p)}")
        if self.P.shape != (self.q, self.q):
            raise ValueError(f"P has shape {self.P.shape}, expected {(self.q, self.q)}")
        if np.max(np.abs(self.P - self.P.T)) > 1e-9:
            raise ValueError("P must be symmetric")
        if min_eig_symmetric(self.P) <= 0.0:
            raise ValueError("P must be positive definite")
        for dim, mapping, name in ((self.p_s, self.G_s, "G_s"),
                                   (self.p_S, self.G_S, "G_S"),
                                   (self.p_d, self.G_d, "G_d")):
            if dim > 0 and mapping is None:
                raise ValueError(f"{name} required when its dimension is {dim}")

    @property
    def p(self) -> int:
        return self.p_s + self.p_S + self.p_d

    def G(self, theta) -> np.ndarray:
        """Stacked map col(G_s, G_S, G_d) evaluated at theta."""
        if self.G_direct is not None:
            return self.G_direct(theta)
        return self.G_stacked(theta)

    def G_stacked(self, theta) -> np.ndarray:
        """Stacking of the component maps, bypassing any G_direct shortcut."""
        theta = np.asarray(theta, dtype=float)
        parts = []
        for dim, mapping in ((self.p_s, self.G_s), (self.p_S, self.G_S),
                             (self.p_d, self.G_d)):
            if dim > 0:
                parts.append(np.asarray(mapping(theta), dtype=float).reshape(dim))
        return np.concatenate(parts) if parts else np.zeros(0)

    def W(self, theta) -> np.ndarray:
        """Selected map T @ G(theta)."""
        return self.T @ self.G(theta)


@dataclass
class NlpreData:
    """Separable regression data for the supply, storage and dissipation maps.

    phi_s and b_s may use the state alongside the port variables: the port
    output alone does not always expose the signal products the supply-rate
    regression needs.
    """

    p_s: int
    p_S: int
    p_d: int
    phi_s: Optional[Callable] = None   # (x, u_p, y_p) -> (p_s,)
    phi_S: Optional[Callable] = None   # (x,) -> (p_S,)
    phi_d: Optional[Callable] = None   # (x,) -> (p_d,)
    b_s: Optional[Callable] = None     # (x, u_p, y_p) -> float
    b_S: Optional[Callable] = None     # (x,) -> float
    b_d: Optional[Callable] = None     # (x,) -> float


@dataclass
class StdLreData:
    """Linear-in-Theta data for the state-equation regression.

    phi_g[i][j] parameterizes entry (i, j) of the input matrix; b_g holds
    the parameter-free parts.  C maps the physical parameters to the
    overparameterized vector Theta; theta_from_C is the scenario's
    (approximate) inverse used by certainty-equivalent control when the
    estimator works in Theta coordinates.
    """

    n: int
    n_p: int
    n_w: int
    C: Callable[[np.ndarray], np.ndarray]
    w_f: Optional[Callable] = None     # (x,) -> (n, n_w)
    b_f: Optional[Callable] = None     # (x,) -> (n,)
    phi_g: Optional[Sequence[Sequence[Optional[Callable]]]] = None  # (x,) -> (n_w,)
    b_g: Optional[Sequence[Sequence[Optional[Callable]]]] = None    # (x,) -> float
    theta_from_C: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(slots=True)
class RegressorSample:
    """One time-stamped regression sample.

    For the power-balance regression Y is a scalar and Omega a p-vector;
    for the state-equation regression Y is an n-vector and Omega is stored
    (n_w, n) so that Y = Omega.T @ Theta in both conventions.
    """

    t: float
    Y: float | np.ndarray
    Omega: np.ndarray

    def predicted(self, params) -> float | np.ndarray:
        return self.Omega.T @ np.asarray(params, dtype=float) \
            if self.Omega.ndim == 2 else float(self.Omega @ np.asarray(params, dtype=float))

    def residual(self, params) -> float:
        r = self.Y - self.predicted(params)
        return abs(r) if np.isscalar(r) else float(np.max(np.abs(r)))


class PbepGenerator:
    """Causal generator of the power-balance regression (Y, Omega).

    Channel layout: one PLAIN channel on (b_s - b_d) and one DERIVATIVE
    channel on b_S feed Y; the Omega block takes PLAIN channels on each
    phi_s and phi_d component (the phi_s block enters negated) and
    DERIVATIVE channels on each phi_S component.  Channels whose signal
    maps are all None are skipped.
    """

    def __init__(self, nlpre: NlpreData, param_map: ParamMap, lam: float,
                 x0, up0, yp0):
        for mine, theirs, name in ((nlpre.p_s, param_map.p_s, "p_s"),
                                   (nlpre.p_S, param_map.p_S, "p_S"),
                                   (nlpre.p_d, param_map.p_d, "p_d")):
            if mine != theirs:
                raise ValueError(
                    f"{name} mismatch: regression data has {mine}, "
                    f"parameter map has {theirs}")
        self.nlpre = nlpre
        self.param_map = param_map
        self.p = param_map.p
        self._has_yplain = nlpre.b_s is not None or nlpre.b_d is not None
        self._has_yderiv = nlpre.b_S is not None
        modes = []
        if self._has_yplain:
            modes.append(ChannelMode.PLAIN)
        if self._has_yderiv:
            modes.append(ChannelMode.DERIVATIVE)
        modes += [ChannelMode.PLAIN] * nlpre.p_s
        modes += [ChannelMode.DERIVATIVE] * nlpre.p_S
        modes += [ChannelMode.PLAIN] * nlpre.p_d
        self._n_ch = len(modes)
        self.bank = FirstOrderFilterBank(lam, modes, self.inputs(x0, up0, yp0))

    @property
    def n_channels(self) -> int:
        return self.bank.n_channels

    @property
    def state(self) -> np.ndarray:
        return self.bank.state

    @state.setter
    def state(self, value):
        self.bank.state = np.asarray(value, dtype=float)

    def inputs(self, x, u_p, y_p) -> np.ndarray:
        d = self.nlpre
        out = np.empty(self._n_ch)
        k = 0
        if self._has_yplain:
            bs = d.b_s(x, u_p, y_p) if d.b_s is not None else 0.0
            bd = d.b_d(x) if d.b_d is not None else 0.0
            out[0] = bs - bd
            k = 1
        if self._has_yderiv:
            out[k] = d.b_S(x)
            k += 1
        if d.p_s:
            out[k:k + d.p_s] = d.phi_s(x, u_p, y_p)
            k += d.p_s
        if d.p_S:
            out[k:k + d.p_S] = d.phi_S(x)
            k += d.p_S
        if d.p_d:
            out[k:] = d.phi_d(x)
        return out

    def state_rate(self, x, u_p, y_p) -> np.ndarray:
        return self.bank.rate(self.inputs(x, u_p, y_p))

    def sample_from(self, t: float, inputs: np.ndarray) -> RegressorSample:
        """Build the sample from already-assembled channel inputs."""
        out = self.bank.output(inputs)
        k = 0
        y = 0.0
        if self._has_yplain:
            y += out[k]
            k += 1
        if self._has_yderiv:
            y -= out[k]
            k += 1
        d = self.nlpre
        omega = np.empty(self.p)
        omega[:d.p_s] = -out[k:k + d.p_s]
        omega[d.p_s:d.p_s + d.p_S] = out[k + d.p_s:k + d.p_s + d.p_S]
        omega[d.p_s + d.p_S:] = out[k + d.p_s + d.p_S:]
        return RegressorSample(t=t, Y=float(y), Omega=omega)

    def sample(self, t: float, x, u_p, y_p) -> RegressorSample:
        return self.sample_from(t, self.inputs(x, u_p, y_p))


class StdLreGenerator:
    """Causal generator of the state-equation regression (Y, Omega).

    Channel layout: DERIVATIVE channels on each state component (the
    pF[x] block of Y), PLAIN channels on the components of b_f + B_g u_p
    when any are declared, and PLAIN channels on every entry of the
    assembled input matrix w_f + w_g.
    """

    def __init__(self, std: StdLreData, lam: float, x0, up0):
        self.std = std
        self.n = std.n
        self.n_w = std.n_w
        self._has_b = std.b_f is not None or std.b_g is not None
        modes = [ChannelMode.DERIVATIVE] * std.n
        if self._has_b:
            modes += [ChannelMode.PLAIN] * std.n
        modes += [ChannelMode.PLAIN] * (std.n * std.n_w)
        self._n_ch = len(modes)
        self.bank = FirstOrderFilterBank(lam, modes, self.inputs(x0, up0))

    @property
    def n_channels(self) -> int:
        return self.bank.n_channels

    @property
    def state(self) -> np.ndarray:
        return self.bank.state

    @state.setter
    def state(self, value):
        self.bank.state = np.asarray(value, dtype=float)

    def _w_matrix(self, x, u_p) -> np.ndarray:
        std = self.std
        w = np.zeros((std.n, std.n_w))
        if std.w_f is not None:
            w += np.asarray(std.w_f(x), dtype=float).reshape(std.n, std.n_w)
        if std.phi_g is not None:
            u_p = np.asarray(u_p, dtype=float).reshape(std.n_p)
            for i in range(std.n):
                for j in range(std.n_p):
                    entry = std.phi_g[i][j]
                    if entry is not None:
                        w[i] += u_p[j] * np.asarray(entry(x), dtype=float)
        return w

    def _b_vector(self, x, u_p) -> np.ndarray:
        std = self.std
        b = np.zeros(std.n)
        if std.b_f is not None:
            b += np.asarray(std.b_f(x), dtype=float).reshape(std.n)
        if std.b_g is not None:
            u_p = np.asarray(u_p, dtype=float).reshape(std.n_p)
            for i in range(std.n):
                for j in range(std.n_p):
                    entry = std.b_g[i][j]
                    if entry is not None:
                        b[i] += u_p[j] * float(entry(x))
        return b

    def inputs(self, x, u_p) -> np.ndarray:
        out = np.empty(self._n_ch)
        n = self.n
        out[:n] = x
        k = n
        if self._has_b:
            out[k:k + n] = self._b_vector(x, u_p)
            k += n
        out[k:] = self._w_matrix(x, u_p).ravel()
        return out

    def state_rate(self, x, u_p) -> np.ndarray:
        return self.bank.rate(self.inputs(x, u_p))

    def sample_from(self, t: float, inputs: np.ndarray) -> RegressorSample:
        """Build the sample from already-assembled channel inputs."""
        out = self.bank.output(inputs)
        n = self.n
        y = out[:n].copy()
        k = n
        if self._has_b:
            y -= out[k:k + n]
            k += n
        omega = out[k:].reshape(n, self.n_w).T
        return RegressorSample(t=t, Y=y, Omega=omega)

    def sample(self, t: float, x, u_p) -> RegressorSample:
        return self.sample_from(t, self.inputs(x, u_p))
