import sys

from django.core.management.base import BaseCommand, CommandError

from apps.exceptions import StabilityError


class StabilityCommand(BaseCommand):
    """Base for the toolkit's management commands.

    Subclasses implement ``run``; toolkit errors are turned into ``CommandError``
    with the exit code of their class (1 usage, 2 ingestion, 3 runtime).
    """

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def usage_error(message):
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                sys.stderr.write(f'{parser.prog}: error: {message}\n')
                sys.exit(1)
            raise CommandError(f'Error: {message}', returncode=1)

        parser.error = usage_error
        return parser

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except StabilityError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except OSError as exc:
            raise CommandError(str(exc), returncode=3) from exc

    def run(self, *args, **options):
        raise NotImplementedError
