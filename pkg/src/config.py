"""Compiler configuration: defaults and environment overrides."""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Logging
LOG_LEVEL = os.environ.get("CNN_DHM_LOG_LEVEL", "INFO")

# Fixed-point word size used when --bits is not given
DEFAULT_BITS = int(os.environ.get("CNN_DHM_BITS", "8"))
MIN_BITS = 2
MAX_BITS = 32

# fmax is a synthesis outcome; 0 means "unknown" and yields zero throughput.
DEFAULT_FMAX_HZ = float(os.environ.get("CNN_DHM_FMAX_HZ", "0"))

DEFAULT_OUTPUT_DIR = os.environ.get("CNN_DHM_OUTPUT_DIR", "out")

# Linear LE cost model coefficients (see src/estimate/calibration.json)
CALIBRATION_FILE = os.environ.get(
    "CNN_DHM_CALIBRATION",
    str(Path(__file__).parent / "estimate" / "calibration.json"),
)

# Widest data format for which tanh is emitted as a lookup table
MAX_LUT_BITS = 12

# Simulator seed for generated stimulus images
DEFAULT_SEED = int(os.environ.get("CNN_DHM_SEED", "0"))

TOOL_VERSION = "0.1.0"
