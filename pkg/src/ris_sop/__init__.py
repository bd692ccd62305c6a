"""Secrecy-outage analysis of a reconfigurable-surface-assisted link.

The package models a transmitter that reaches its receiver only through
a reflecting surface of N phase-controlled elements, while an
eavesdropper hears both the surface and a direct path.  Surface phases
are chosen per element from a b-bit lattice (or continuously).  It
provides

* exact statistics of the legitimate and eavesdropper link gains,
* a closed-form upper bound, exact numeric values, and large-N
  asymptotics for the secrecy outage probability,
* a reproducible Monte-Carlo engine with a compiled fast path,
* a command line for parameter sweeps to CSV.
"""

__version__ = "0.1.0"
