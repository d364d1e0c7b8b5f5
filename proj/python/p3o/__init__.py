"""Python surface of the policy-gradient lab.

The compiled extension normally sits next to this file (installed wheel).
For in-tree builds, point P3O_EXT_DIR at the directory that contains the
built ``_core`` module.
"""

import importlib.util
import os
import sys


def _load_core():
    try:
        from . import _core  # installed layout
        return _core
    except ImportError:
        pass

    ext_dir = os.environ.get("P3O_EXT_DIR")
    if not ext_dir:
        raise ImportError(
            "p3o._core not built into the package and P3O_EXT_DIR is unset"
        )
    for name in os.listdir(ext_dir):
        if name.startswith("_core") and name.endswith((".so", ".pyd")):
            spec = importlib.util.spec_from_file_location(
                __name__ + "._core", os.path.join(ext_dir, name)
            )
            module = importlib.util.module_from_spec(spec)
            sys.modules[spec.name] = module
            spec.loader.exec_module(module)
            return module
    raise ImportError(f"no _core extension found in {ext_dir}")


_core = _load_core()

# re-export the public names
_PUBLIC = [n for n in dir(_core) if not n.startswith("_")]
globals().update({n: getattr(_core, n) for n in _PUBLIC})
__all__ = _PUBLIC
