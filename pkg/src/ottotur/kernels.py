"""Backend selection for the Monte Carlo hot loops.

The compiled extension is used when it was built; otherwise the numpy
fallback. Set ``OTTOTUR_PURE_PYTHON=1`` to force the fallback.
"""

import importlib
import os


def load_backend(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "cython":
        return importlib.import_module("ottotur._mc_core")
    if name == "python":
        return importlib.import_module("ottotur._mc_core_py")
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if os.environ.get("OTTOTUR_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
    BACKEND = "python"
else:
    BACKEND = available_backends()[0]

_impl = load_backend(BACKEND)
heun_isochore = _impl.heun_isochore
verlet_adiabat = _impl.verlet_adiabat
