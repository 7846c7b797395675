"""CLI: qmfig render --kind <k> --in <csv...> --out <path> [--cutoff t]."""

import sys

import click

from .io import FeedError
from .render import KINDS, FigureRequest, render


@click.group()
def main():
    """Render qmflow CSV artifacts into figures."""


@main.command("render")
@click.option("--kind", type=click.Choice(list(KINDS)), required=True)
@click.option("--in", "inputs", multiple=True, required=True,
              type=click.Path(), help="input CSV(s)")
@click.option("--out", "output", type=click.Path(), required=True)
@click.option("--cutoff", type=float, default=None,
              help="training cutoff time for the dashed marker")
@click.option("--title", default="")
@click.option("--times", default="",
              help="comma-separated snapshot times (snapshot-grid)")
def render_cmd(kind, inputs, output, cutoff, title, times):
    try:
        t_list = [float(v) for v in times.split(",") if v.strip()]
        req = FigureRequest(kind=kind, inputs=list(inputs), output=output,
                            cutoff=cutoff, title=title, times=t_list)
        path = render(req)
        click.echo(path)
    except FeedError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
