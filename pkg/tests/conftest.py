import os
import pathlib
import sys

# single-threaded BLAS: faster on these tiny matrices and removes scheduler
# noise from timing-sensitive tests (must be set before numpy loads)
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

SRC = pathlib.Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))
