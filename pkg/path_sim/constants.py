# path_sim/constants.py

# palabras de 64 bits de Philox por paso fino (dos uniformes → dos normales)
WORDS_PER_STEP = 2
# Philox4x64 entrega 4 palabras por incremento de contador
WORDS_PER_BLOCK = 4
STEPS_PER_BLOCK = WORDS_PER_BLOCK // WORDS_PER_STEP

TWO_POW_M53 = 2.0 ** -53

# complemento de Schur negativo por debajo de esto (relativo a v) se trata como redondeo
SCHUR_SLACK = 1e-12

# layout binario de FinePath
DUMP_MAGIC = b"SPFP"
DUMP_VERSION = 1
