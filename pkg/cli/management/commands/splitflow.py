# cli/management/commands/splitflow.py
import json
import time

from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone

from cli import services
from cli.constants import EXIT_CONSTRAINT, EXIT_FAILED_CHECK, EXIT_NUMERICAL, EXPERIMENT_SELFTEST, EXPERIMENTS
from cli.serializers import ExperimentConfigSerializer
from splitflow.exceptions import ConstraintViolation, NumericalFailure


class Command(BaseCommand):
    help = "Ejecuta un experimento de splitflow y escribe CSV + resumen JSON."

    def add_arguments(self, parser):
        parser.add_argument("experiment", choices=EXPERIMENTS)
        parser.add_argument("--config", help="Documento JSON con los bloques model/grid/norm/mc/counterexample/output.")
        parser.add_argument("--seed", type=int, help="Semilla (pisa SPLITFLOW_SEED y el archivo).")
        parser.add_argument("--threads", type=int, help="Hilos de trabajo para el Monte Carlo.")
        parser.add_argument("--out", help="Directorio de salida.")
        parser.add_argument("--input", help="CSV de entrada para `fit`.")

    def handle(self, *args, **options):
        experiment = options["experiment"]
        started = time.perf_counter()
        try:
            data = services.load_config(options["config"]) if options.get("config") else {}
            data = services.merge_overrides(
                data,
                experiment=experiment,
                seed=options.get("seed"),
                threads=options.get("threads"),
                out=options.get("out"),
                input_path=options.get("input"),
            )
            serializer = ExperimentConfigSerializer(data=data)
            if not serializer.is_valid():
                raise CommandError(
                    f"Configuración inválida: {json.dumps(serializer.errors, ensure_ascii=False)}",
                    returncode=EXIT_CONSTRAINT,
                )
            outcome = services.run_experiment(serializer.validated_data)
            written = services.write_outputs(
                outcome,
                serializer.validated_data,
                runtime_s=time.perf_counter() - started,
                timestamp=timezone.now().isoformat(),
            )
        except ConstraintViolation as exc:
            raise CommandError(f"[{exc.constraint}] {' '.join(exc.messages)}", returncode=EXIT_CONSTRAINT)
        except NumericalFailure as exc:
            raise CommandError(f"Falla numérica: {exc}", returncode=EXIT_NUMERICAL)

        for kind, path in written.items():
            self.stdout.write(f"{kind}: {path}")
        line = f"{experiment}: slope={outcome.slope} θ_max={outcome.theta_max} pass={outcome.passed}"
        if outcome.passed:
            self.stdout.write(self.style.SUCCESS(line))
        else:
            self.stdout.write(self.style.WARNING(line))

        if experiment == EXPERIMENT_SELFTEST and not outcome.passed:
            raise CommandError(
                f"selftest falló: {', '.join(outcome.extra.get('failed', []))}", returncode=EXIT_FAILED_CHECK
            )
