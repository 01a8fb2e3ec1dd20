import logging

from django.core.management.base import BaseCommand, CommandError

from ...exceptions import ConfigError, StageError
from ...pipeline import Pipeline
from ...serializers import load_config

logger = logging.getLogger(__name__)

SUBCOMMANDS = {
    "synth": "Generate a synthetic corpus with planted topics into the output directory.",
    "ingest": "Load and validate the publication and citation tables.",
    "cluster": "Build the citation network and the topic hierarchy.",
    "label": "Label every class of every hierarchy level.",
    "growth": "Compute topic growth ratios.",
    "fit": "Fit the hurdle model for the selected disciplines.",
    "report": "Write the per-discipline tables and figures from fitted models.",
    "run": "Run every stage in order.",
}


class Command(BaseCommand):
    help = "Detect topics in a citation network and relate topic growth to citation counts."

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", metavar="subcommand")
        subparsers.required = True
        for name, text in SUBCOMMANDS.items():
            subparser = subparsers.add_parser(name, help=text, description=text)
            subparser.add_argument("--config", help="JSON run configuration; every key is optional.")
            subparser.add_argument("--seed", type=int, help="Override every seed of the configuration.")
            subparser.add_argument("--out", help="Override the output directory.")
            if name == "run":
                subparser.add_argument(
                    "--synthetic",
                    action="store_true",
                    help="Generate a synthetic corpus first and run on it.",
                )

    def handle(self, *args, **options):
        subcommand = options["subcommand"]
        try:
            config = load_config(options.get("config"))
            if options.get("seed") is not None:
                config = config.with_seed(options["seed"])
            if options.get("out"):
                config = config.with_out(options["out"])

            pipeline = Pipeline(config)
            if subcommand == "run":
                pipeline.run(synthetic=options.get("synthetic", False))
            else:
                getattr(pipeline, subcommand)()
        except StageError as exc:
            raise CommandError(str(exc), returncode=1)
        except ConfigError as exc:
            raise CommandError(f"[config] {exc}", returncode=1)

        logger.info("%s finished, output in %s", subcommand, config.out)
        self.stdout.write(self.style.SUCCESS(f"{subcommand}: done ({config.out})"))
