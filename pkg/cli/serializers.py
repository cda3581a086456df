# cli/serializers.py
from __future__ import annotations

from django.conf import settings
from rest_framework import serializers

from counterexample import constants as cx
from norms_stats.domain import POLICY_CHOICES, POLICY_DYADIC
from spectral_model.constants import IOTA_CHOICES, IOTA_CUSTOM, IOTA_ONES, SPECTRUM_CUSTOM, SPECTRUM_DIRICHLET
from splitflow.conf import _cfg
from splitflow.exceptions import ConstraintViolation
from .constants import CONFIG_BLOCKS, DEFAULT_K, DEFAULT_N_GRID, EXPERIMENTS

from . import services


# ===========================
# Bloques del archivo de configuración
# ===========================
class ModelBlockSerializer(serializers.Serializer):
    spectrum = serializers.ChoiceField(choices=[SPECTRUM_DIRICHLET, SPECTRUM_CUSTOM], default=SPECTRUM_DIRICHLET)
    K = serializers.IntegerField(min_value=1, default=DEFAULT_K)
    eigenvalues = serializers.ListField(child=serializers.FloatField(), required=False)
    w = serializers.FloatField(min_value=0.0, default=0.0)
    sigma_E = serializers.FloatField(default=-0.3)
    beta = serializers.FloatField(min_value=0.0, default=0.0)
    iota = serializers.ChoiceField(choices=IOTA_CHOICES, default=IOTA_ONES)
    iota_power = serializers.FloatField(default=0.0)
    iota_values = serializers.ListField(child=serializers.FloatField(min_value=0.0), required=False)

    def validate(self, attrs):
        if attrs["spectrum"] == SPECTRUM_CUSTOM and not attrs.get("eigenvalues"):
            raise serializers.ValidationError({"eigenvalues": "Requerido con spectrum=custom."})
        if attrs["iota"] == IOTA_CUSTOM and not attrs.get("iota_values"):
            raise serializers.ValidationError({"iota_values": "Requerido con iota=custom."})
        return attrs


class GridBlockSerializer(serializers.Serializer):
    T = serializers.FloatField(default=1.0)
    n = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1,
                              default=lambda: list(DEFAULT_N_GRID))
    m = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)


class NormBlockSerializer(serializers.Serializer):
    alpha = serializers.FloatField(default=0.0)
    gamma = serializers.FloatField(default=0.0)
    p = serializers.FloatField(min_value=1.0, default=2.0)
    spatial = serializers.BooleanField(default=False)
    delta_space = serializers.FloatField(min_value=0.0, default=0.0)
    policy = serializers.ChoiceField(choices=POLICY_CHOICES, default=POLICY_DYADIC)
    P = serializers.IntegerField(min_value=2, default=lambda: int(_cfg("SPATIAL_GRID")))
    theta = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)
    sup_in_time = serializers.BooleanField(default=False)


class MCBlockSerializer(serializers.Serializer):
    M = serializers.IntegerField(min_value=1, default=200)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1,
                                    default=lambda: settings.SPLITFLOW_DEFAULT_SEED)
    threads = serializers.IntegerField(min_value=1, default=lambda: settings.SPLITFLOW_THREADS)
    bootstrap = serializers.IntegerField(min_value=0, default=0)


class CounterexampleBlockSerializer(serializers.Serializer):
    p = serializers.FloatField(default=cx.DEFAULT_P)
    u = serializers.FloatField(default=cx.DEFAULT_U)
    r = serializers.FloatField(default=cx.DEFAULT_R)
    q = serializers.FloatField(min_value=1.0, default=cx.DEFAULT_Q)
    n = serializers.ListField(child=serializers.IntegerField(min_value=1, max_value=24), min_length=1,
                              default=lambda: list(cx.DEFAULT_N_LIST))
    M = serializers.IntegerField(min_value=2, default=cx.DEFAULT_M)
    resolution = serializers.IntegerField(min_value=2, default=cx.DEFAULT_RESOLUTION)


class OutputBlockSerializer(serializers.Serializer):
    dir = serializers.CharField(default=lambda: settings.SPLITFLOW_OUT_DIR)
    stem = serializers.CharField(allow_blank=True, default="")
    input = serializers.CharField(required=False, allow_null=True, default=None)


# ===========================
# Configuración completa
# ===========================
class ExperimentConfigSerializer(serializers.Serializer):
    """
    Documento JSON de un experimento. Los bloques ausentes toman sus valores
    por defecto; validate() arma los objetos de dominio del experimento para
    que toda desigualdad violada salga con su nombre.
    """
    experiment = serializers.ChoiceField(choices=EXPERIMENTS)
    model = ModelBlockSerializer()
    grid = GridBlockSerializer()
    norm = NormBlockSerializer()
    mc = MCBlockSerializer()
    counterexample = CounterexampleBlockSerializer()
    output = OutputBlockSerializer()

    def to_internal_value(self, data):
        if isinstance(data, dict):
            data = {**{block: {} for block in CONFIG_BLOCKS}, **data}
        return super().to_internal_value(data)

    def validate(self, attrs):
        try:
            services.check_feasible(attrs)
        except ConstraintViolation as exc:
            raise serializers.ValidationError({exc.constraint or "config": exc.messages})
        return attrs
