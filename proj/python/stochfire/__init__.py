"""Stochastic forest-fire CA: simulation, ensemble statistics, verification."""

try:
    from ._stochfire import *  # noqa: F401,F403  (installed layout)
except ImportError:  # build-tree layout: extension sits next to the package
    from _stochfire import *  # noqa: F401,F403
