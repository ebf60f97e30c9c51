"""cdkit: constant-domain Kripke-style model theory at desk scale."""

__version__ = "0.1.0"
