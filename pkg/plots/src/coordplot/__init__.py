from .data import PlotSpec, SeriesSpec, aggregate_series, gap_curves, parse_spec
from .render import render
from .specfile import SpecError, load, loads

__version__ = "0.1.0"
