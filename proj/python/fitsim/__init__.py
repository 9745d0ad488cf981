"""Fitness-driven preferential-attachment population model.

Thin Python surface over the C++ core: run the simulator, read its state,
evaluate the closed-form limit laws, and drive the on-disk run/compare
orchestration (the same artifacts the ``fitsim`` CLI writes).
"""

try:
    # Installed layout: the extension lives inside the package.
    from ._fitsim import *  # noqa: F401,F403
    from . import _fitsim as _impl
except ImportError:  # pragma: no cover - build-tree layout
    # Build-tree layout: the extension sits on PYTHONPATH next to the
    # package (e.g. PYTHONPATH=<build>/bindings:<src>/python).
    from _fitsim import *  # noqa: F401,F403
    import _fitsim as _impl

__version__ = "0.1.0"
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
