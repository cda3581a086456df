# counterexample/constants.py

# niveles extra sobre n en el campo simulado (k_max = n + EXTRA_LEVELS)
EXTRA_LEVELS = 4
# niveles para el momento de la integral exacta (cola < 1e-15 con los parámetros por defecto)
EXACT_LEVELS = 64
# bits del refinamiento junto a cada desplazamiento i/N
REFINE_BITS = 8

DEFAULT_P = 1.0
DEFAULT_U = 3.0
DEFAULT_R = 0.25
DEFAULT_Q = 16.0
DEFAULT_N_LIST = (4, 5, 6, 7, 8)
DEFAULT_M = 400
DEFAULT_RESOLUTION = 4096

COLUMNS = (
    "n", "mc_estimate", "ci_low", "ci_high",
    "subwindow_quantity", "lower_bound", "exact_moment", "subwindow_exact",
)
