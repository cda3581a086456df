# cli/constants.py

EXPERIMENT_MS = "ms-sweep"
EXPERIMENT_PATH = "path-sweep"
EXPERIMENT_HEAT = "heat-demo"
EXPERIMENT_COUNTEREXAMPLE = "counterexample"
EXPERIMENT_FIT = "fit"
EXPERIMENT_SELFTEST = "selftest"

EXPERIMENTS = (
    EXPERIMENT_MS,
    EXPERIMENT_PATH,
    EXPERIMENT_HEAT,
    EXPERIMENT_COUNTEREXAMPLE,
    EXPERIMENT_FIT,
    EXPERIMENT_SELFTEST,
)

# experimentos que necesitan un SweepConfig
SWEEP_EXPERIMENTS = (EXPERIMENT_MS, EXPERIMENT_PATH, EXPERIMENT_HEAT)

CONFIG_BLOCKS = ("model", "grid", "norm", "mc", "counterexample", "output")

DEFAULT_K = 4096
DEFAULT_N_GRID = tuple(2 ** k for k in range(2, 11))

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CONSTRAINT = 2
EXIT_NUMERICAL = 3
