"""Single-phase distribution feeder simulation with solar generation.

Modules
-------
grid
    Network types, per-unit bases, feeder file loader.
sequence
    Positive-sequence line reduction and Y-bus assembly.
pv
    Single-diode PV array model and maximum power point.
inverter
    Inverter current references, RL phasor circuit, tracking simulation.
powerflow
    Newton-Raphson and backward/forward sweep power flow.
daily
    24-hour load/PV scenario.
svg, cli
    Plot emission and the ``gridsim`` command.

The hot scalar kernels live in the compiled ``_ckernels`` extension, with a
pure-Python fallback picked at import (see :mod:`gridsim.kernels`).
"""
__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402
