"""Weak-form generative sampling of SDE invariant distributions.

Thin wrapper over the compiled ``_wgs`` extension.  The extension is found
either inside this package (installed layout) or on ``sys.path`` directly
(in-tree build directory on ``PYTHONPATH``).
"""

try:
    from wgs._wgs import *  # noqa: F401,F403
    from wgs._wgs import __version__  # noqa: F401
except ImportError:  # build-tree layout: _wgs.so next to the CMake cache
    from _wgs import *  # noqa: F401,F403
    from _wgs import __version__  # noqa: F401
