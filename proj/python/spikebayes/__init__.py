"""Python interface to the spikebayes C++ core."""

import json

from . import _core
from ._core import (
    Config,
    ConfigError,
    DimensionMismatch,
    Error,
    InvalidArgument,
    IoError,
    UnsupportedLaw,
    load_config,
    run_experiment,
)

__all__ = [
    "Config", "ConfigError", "DimensionMismatch", "Error", "InvalidArgument", "IoError", "UnsupportedLaw",
    "load_config", "parse_config", "run_experiment", "generate_scenario", "sample_prior", "log_prior_density",
    "forward", "log_likelihood", "log_posterior_unnorm", "estimate_evidence", "hellinger", "run_chain",
    "charfun",
]


def parse_config(doc, base_dir=""):
    """Validate a config given as a dict (or JSON text)."""
    text = doc if isinstance(doc, str) else json.dumps(doc)
    return _core.parse_config(text, str(base_dir))


def generate_scenario(config):
    return json.loads(_core.generate_scenario(config))


def sample_prior(config, seed):
    """One prior draw as {"d", "m", "field", "atoms": [{"y", "q"}]}."""
    return json.loads(_core.sample_prior(config, seed))


def log_prior_density(config, measure):
    return _core.log_prior_density(config, json.dumps(measure))


def forward(config, measure):
    return _core.forward(config, json.dumps(measure))


def log_likelihood(config, measure, data=None):
    return _core.log_likelihood(config, json.dumps(measure), data)


def log_posterior_unnorm(config, measure, data=None):
    return _core.log_posterior_unnorm(config, json.dumps(measure), data)


def estimate_evidence(config, n, seed, data=None):
    """(log_z, se) by prior-sampling Monte Carlo."""
    return _core.estimate_evidence(config, n, seed, data)


def hellinger(config, data1, data2, n, seed):
    return json.loads(_core.hellinger(config, data1, data2, n, seed))


def run_chain(config, data=None, keep_records=False):
    """Run the configured sampler; returns (summary, records)."""
    summary, records = _core.run_chain(config, data, keep_records)
    return json.loads(summary), [json.loads(r) for r in records]


def charfun(config, f, n, seed):
    """Empirical and closed-form E exp(i <u, f>) for a scalar f on a 1-D domain."""
    return _core.charfun(config, f, n, seed)
