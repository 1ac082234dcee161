#!/usr/bin/env python
"""Command-line entry point for the D2S pipeline.

Every pipeline stage is a management command, e.g.::

    python manage.py ontology validate --path sudwatch/data/dao_fixture.tsv
    python manage.py synth --out out/synth --seed 7
    python manage.py ablate --corpus out/synth/corpus.tsv --runs 3 --out out/ablate
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'd2s.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install backend/requirements.txt into the "
            "active environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
