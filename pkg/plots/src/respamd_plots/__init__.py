"""Figure rendering for respamd experiment output directories.

Couples to the engine through its CSV files only: summary.csv,
energies.csv, pressure.csv and rdf.csv as emitted into nu<value>_s<factor>/
grid-point directories. Five figure kinds mirror the standard analysis
set: energy-variation curves, energy-deviation histograms, speedup curves,
radial distribution functions and pressure histograms.
"""

from respamd_plots.figures import FIGURE_KINDS, PlotJob, SchemaError, build_figure, render

__version__ = "0.1.0"
