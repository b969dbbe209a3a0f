"""Continuous-scale D3Q27 lattice Boltzmann solver with central-moment relaxation."""
import numba as _numba

# prefer OpenMP; an outdated TBB only produces a warning before falling back
_numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from .block import CellFlag, ScaleBlock  # noqa: E402
from .collision import RelaxationSpec, default_schedule  # noqa: E402
from .lattice import LATTICE  # noqa: E402
from .scheduler import BlockSpec, ScaleGraph, advance, single_block_graph  # noqa: E402

__version__ = "0.1.0"

__all__ = ["CellFlag", "ScaleBlock", "RelaxationSpec", "default_schedule", "LATTICE",
           "BlockSpec", "ScaleGraph", "advance", "single_block_graph", "__version__"]
