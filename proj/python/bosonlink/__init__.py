"""Beyond-RWA bosonic mode transforms, pulse design and a Fock-space oracle.

The heavy lifting lives in the compiled extension `_bosonlink`; this package
re-exports its public surface. Installed wheels carry the extension inside the
package; in-tree runs find it top-level on PYTHONPATH next to the build tree.
"""

import importlib

try:
    _impl = importlib.import_module("bosonlink._bosonlink")
except ImportError:
    _impl = importlib.import_module("_bosonlink")

_PUBLIC = [name for name in dir(_impl) if not name.startswith("_")]
globals().update({name: getattr(_impl, name) for name in _PUBLIC})
__version__ = _impl.__version__
__all__ = sorted(_PUBLIC)
