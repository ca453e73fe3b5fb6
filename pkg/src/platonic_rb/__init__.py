"""Randomized benchmarking with the Platonic rotation groups.

Core layers: `qmath` (rotations, Bloch maps), `tables`/`groups` (gate
decompositions and certified group construction), `channels` (gate-level
noise), `pulse` (three-level pulse simulation and calibration), `rb`
(sequence generation and execution), `fitting` (decay fits), and `orbit`
(fixed-length RB parameter tuning). A FastAPI service (`service`) exposes
the runners; the command-line client (`cli`) drives them in-process or
against a remote server.
"""

__version__ = "0.1.0"
