"""Scikit-learn style front end for the infinite HMM samplers.

``HcrpHmm`` follows the estimator protocol (``get_params`` / ``set_params``,
``fit`` / ``predict`` / ``transform``) without importing scikit-learn, so it
drops into pipelines and model-selection utilities while the sampling
machinery stays dependency-light.
"""

import random

import numpy as np

from . import hyper, particle
from .harness import derive_seed
from .splitmerge import split_merge_move
from .sweeps import blocked_sweep, stepwise_sweep


def check_sequence(y, n_symbols=None):
    """Validate an observation sequence: 1-d, integer, non-negative.

    Returns ``(list_of_ints, n_symbols)`` with ``n_symbols`` inferred as
    ``max + 1`` when not given.
    """
    arr = np.asarray(y)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError("expected a 1-d sequence, got shape %r" % (arr.shape,))
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise ValueError("symbols must be integers")
        arr = rounded.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise ValueError("symbols must be non-negative")
    seq = [int(v) for v in arr]
    if n_symbols is None:
        n_symbols = 1 + max(seq) if seq else 1
    elif seq and max(seq) >= n_symbols:
        raise ValueError("symbol %d outside alphabet of size %d"
                         % (max(seq), n_symbols))
    return seq, n_symbols


class HcrpHmm:
    """Infinite HMM fitted by a collapsed Metropolis-Hastings sampler.

    Parameters
    ----------
    sampler : str
        One of ``sgibbs``, ``sslice``, ``bgibbs``, ``beam``.
    block_size : int
        Target block length for the blocked and beam samplers.
    sm_per_sweep : int
        Split-merge attempts appended to every sweep.
    sweeps : int
        Number of sweeps run by :meth:`fit`.
    n_symbols : int or None
        Alphabet size; inferred from the data when ``None``.
    resample_hyperparameters : bool
        Re-draw the four concentrations after every sweep.
    random_state : int
        Seed of the chain's generator.
    """

    def __init__(self, sampler="beam", block_size=8, sm_per_sweep=0,
                 sweeps=100, init_particles=particle.DEFAULT_PARTICLES,
                 n_symbols=None, resample_hyperparameters=True,
                 random_state=0):
        self.sampler = sampler
        self.block_size = block_size
        self.sm_per_sweep = sm_per_sweep
        self.sweeps = sweeps
        self.init_particles = init_particles
        self.n_symbols = n_symbols
        self.resample_hyperparameters = resample_hyperparameters
        self.random_state = random_state

    # -- estimator protocol -------------------------------------------------

    _param_names = ("sampler", "block_size", "sm_per_sweep", "sweeps",
                    "init_particles", "n_symbols",
                    "resample_hyperparameters", "random_state")

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params):
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError("unknown parameter %r" % name)
            setattr(self, name, value)
        return self

    # -- fitting ------------------------------------------------------------

    def _sweep(self, h, rng):
        if self.sampler == "sgibbs":
            return stepwise_sweep(h, rng)
        if self.sampler == "sslice":
            return blocked_sweep(h, 1, rng, beam=True)
        if self.sampler == "bgibbs":
            return blocked_sweep(h, self.block_size, rng)
        if self.sampler == "beam":
            return blocked_sweep(h, self.block_size, rng, beam=True)
        raise ValueError("unknown sampler %r" % self.sampler)

    def fit(self, y, _unused=None):
        """Run the configured chain on one observation sequence."""
        seq, n_symbols = check_sequence(y, self.n_symbols)
        rng = random.Random(derive_seed(self.random_state, 0))
        h = particle.init_state(seq, n_symbols, rng,
                                n_particles=self.init_particles)
        trace = [(0, h.num_states())]
        for sweep in range(1, self.sweeps + 1):
            self._sweep(h, rng)
            for _ in range(self.sm_per_sweep):
                split_merge_move(h, rng)
            if self.resample_hyperparameters:
                hyper.resample_hyperparameters(h, rng)
            trace.append((sweep, h.num_states()))
        self.model_ = h
        self.rng_ = rng
        self.states_ = np.asarray(h.x, dtype=np.int64)
        self.n_states_ = h.num_states()
        self.trace_ = trace
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ValueError("this estimator is not fitted yet; call fit first")

    def predict(self, y=None):
        """Hidden state labels of the fitted sequence (the last sample)."""
        self._check_fitted()
        if y is not None:
            seq, _ = check_sequence(y, self.model_.n_symbols)
            if seq != self.model_.y:
                raise ValueError("predict supports only the fitted sequence; "
                                 "use score for held-out data")
        return self.states_.copy()

    def transform(self, y=None):
        """Column-vector view of :meth:`predict`, for pipeline use."""
        return self.predict(y).reshape(-1, 1)

    def fit_predict(self, y):
        return self.fit(y).predict()

    def score(self, y, n_particles=particle.DEFAULT_PARTICLES):
        """Mean log predictive likelihood per held-out symbol."""
        self._check_fitted()
        seq, _ = check_sequence(y, self.model_.n_symbols)
        if not seq:
            raise ValueError("cannot score an empty sequence")
        likes = particle.predictive_likelihoods(self.model_, seq, self.rng_,
                                                n_particles=n_particles)
        return float(np.log(likes).mean())
