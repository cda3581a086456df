# spectral_model/constants.py
import numpy as np

# reglas para los pesos de inclusión ι_k
IOTA_ONES = "ones"
IOTA_POWER = "power"
IOTA_CUSTOM = "custom"
IOTA_CHOICES = (IOTA_ONES, IOTA_POWER, IOTA_CUSTOM)

SPECTRUM_DIRICHLET = "dirichlet"
SPECTRUM_CUSTOM = "custom"

PI2 = np.pi ** 2

# tolerancia relativa al decidir si t cae exactamente sobre un nodo t_j
GRID_SNAP = 1e-9
