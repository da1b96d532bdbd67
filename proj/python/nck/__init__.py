"""Python access to the nck solver; dictionaries go in and come out."""
import json

from . import _nck
from ._nck import ConfigError, critical_constant_b, decay_threshold, __version__

__all__ = ["ConfigError", "config_hash", "constants", "critical_constant_b", "decay_threshold",
           "functionals", "moment", "phi", "run", "trajectory", "__version__"]


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def config_hash(config):
    return _nck.config_hash(_dump(config))


def functionals(measure, phi):
    return json.loads(_nck.functionals(_dump(measure), phi))


def constants():
    return json.loads(_nck.constants())


def run(config):
    return json.loads(_nck.run(_dump(config)))


def trajectory(config):
    return _nck.trajectory(_dump(config))


def moment(measure, alpha):
    return _nck.moment(_dump(measure), alpha)


def phi(name, x):
    return _nck.phi(name, x)
