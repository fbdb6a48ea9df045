# -*- coding: utf-8 -*-
"""bdcore Command Line Interface"""
import logging

import click

from bdcore import __version__
from bdcore.cli.app import app_cmd
from bdcore.cli.bench import bench_cmd
from bdcore.cli.gen import gen_cmd
from bdcore.cli.run import run_cmd
from bdcore.cli.verify import verify_cmd


logger = logging.getLogger(__name__)

commands = [gen_cmd, run_cmd, verify_cmd, bench_cmd, app_cmd]


@click.group(name="bdcore")
@click.version_option(version=__version__, prog_name="bdcore")
def main():
    """Batch-dynamic balanced orientations, coreness and density estimates."""


for command in commands:
    main.add_command(command)


if __name__ == "__main__":
    try:
        main(obj={})
    except Exception:
        logger.exception("Error running bdcore CLI")
        raise
