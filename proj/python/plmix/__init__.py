"""Bayesian Plackett-Luce mixtures for partial top orderings."""

from ._core import (  # noqa: F401
    Dataset,
    InputError,
    ModelFit,
    __version__,
    fit,
    fit_map,
    mixture_log_lik,
    modal_ordering,
    parse_dataset,
    pl_log_prob,
    read_dataset,
    run_cli,
    simulate,
)
