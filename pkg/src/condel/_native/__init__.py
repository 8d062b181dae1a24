"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``CONDEL_PURE=1`` to force the pure implementation (used by the
benchmark and the twin-equality tests).
"""

import os

from . import _pure

if os.environ.get("CONDEL_PURE") == "1":
    _impl = _pure
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

IMPL = _impl.IMPL
tokenize_spans = _impl.tokenize_spans
logistic_loss_grad = _impl.logistic_loss_grad
logistic_train = _impl.logistic_train


def available_impls():
    """Return the importable kernel modules, pure first."""
    impls = [_pure]
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        impls.append(_kernels)
    return impls
