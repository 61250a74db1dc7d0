"""Simulation and analysis toolkit for frequency-converted heralded single photons.

Submodules:
  spectral  - spectra, coherence envelopes, bandwidth / coherence-time metrics
  twophoton - Franson pair coherence, coincidence fringes, Bell arithmetic
  simkit    - Monte Carlo time-tag generation for the full detection chain
  tagcorr   - correlation histograms, SBR extraction, heralded g2(0)
  models    - closed-form rate models and SBR curve fitting
  scenario / io / cli - configuration, file formats, command line
"""

from . import io, models, scenario, simkit, spectral, tagcorr, twophoton

__all__ = ["io", "models", "scenario", "simkit", "spectral", "tagcorr", "twophoton"]
__version__ = "0.1.0"
