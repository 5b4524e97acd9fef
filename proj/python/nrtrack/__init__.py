"""Newton-flow output tracking: plants, reference curves, predictor,
controller, platoon coordination, and scenario runners.

Everything public lives in the compiled core; this package just re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__doc__ = _core_doc
__version__ = "1.0.0"
