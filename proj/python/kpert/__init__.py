"""Perturbation series of forward space-time kernels.

Thin re-export of the compiled extension; see the C++ headers for the
authoritative documentation of each operation.
"""

import os
import sys

# In-tree test runs point KPERT_EXT_DIR at the build directory holding the
# extension; installed wheels find it next to this file.
_ext_dir = os.environ.get("KPERT_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

try:
    from ._kpert import *  # noqa: F401,F403
    from ._kpert import __doc__ as _doc
except ImportError:
    from _kpert import *  # noqa: F401,F403
    from _kpert import __doc__ as _doc

__doc__ = _doc
