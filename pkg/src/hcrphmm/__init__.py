"""Collapsed-representation samplers for infinite hidden Markov models.

The package keeps hierarchical Chinese restaurant process states as plain
count structures with exact undo, resamples coupled draws from them with a
Metropolis-Hastings engine, and builds four HMM samplers on top (step-wise,
blocked, beam, split-merge) plus diagnostics, data tooling and an experiment
CLI.  ``HcrpHmm`` is the scikit-learn style entry point.
"""

from .collapsed_mh import (DrawRequest, PredictiveProposal,
                           ProposalOutsideRestrictionError, RatioTracker,
                           resample_draws)
from .diagnostics import (autocorrelation_time, mutual_information,
                          perplexity)
from .estimator import HcrpHmm, check_sequence
from .franchise import NEW, Franchise, RemoveFromEmptyError, UndoLog
from .hmm import INITIAL_STATE, HmmState, PredictiveMatrix, generate
from .hyper import resample_hyperparameters
from .particle import init_state, predictive_likelihoods
from .splitmerge import split_merge_move
from .sweeps import (add_seq, beam_sweep, blocked_sweep, remove_seq,
                     stepwise_sweep)

__version__ = "0.1.0"

__all__ = [
    "DrawRequest", "PredictiveProposal", "ProposalOutsideRestrictionError",
    "RatioTracker", "resample_draws", "autocorrelation_time",
    "mutual_information", "perplexity", "HcrpHmm", "check_sequence", "NEW",
    "Franchise", "RemoveFromEmptyError", "UndoLog", "INITIAL_STATE",
    "HmmState", "PredictiveMatrix", "generate", "resample_hyperparameters",
    "init_state", "predictive_likelihoods", "split_merge_move", "add_seq",
    "beam_sweep", "blocked_sweep", "remove_seq", "stepwise_sweep",
    "__version__",
]
