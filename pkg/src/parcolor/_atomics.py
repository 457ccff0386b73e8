"""Atomic fetch-and-add for nogil kernels.

The phase kernels run concurrently on plain threads with the GIL released;
work claiming (shared chunk cursor) and shared-queue appends both need a
real atomic counter, which numba does not expose for the CPU target.  This
lowers directly to an LLVM ``atomicrmw add``.
"""

from numba import types
from numba.core import cgutils
from numba.extending import intrinsic


@intrinsic
def atomic_fetch_add(typingctx, arr, val):
    """Atomically add ``val`` to ``arr[0]`` (1-D int64 array), return the old value."""
    if not (isinstance(arr, types.Array) and arr.dtype == types.int64 and arr.ndim == 1):
        return None
    sig = types.int64(arr, types.int64)

    def codegen(context, builder, signature, args):
        data, increment = args
        array = context.make_array(signature.args[0])(context, builder, data)
        zero = context.get_constant(types.intp, 0)
        ptr = cgutils.get_item_pointer(context, builder, signature.args[0],
                                       array, [zero])
        return builder.atomic_rmw("add", ptr, increment, "monotonic")

    return sig, codegen
