"""Command-line front end.

Exit status: 0 when no duplication is found (or a command succeeds), 2 when
``detect`` finds duplicated regions, 1 on any error.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click

from .config import DetectorConfig
from .image_core import ImageFormatError, load_image, load_mask, save_image, save_mask
from .matching import detect
from .metrics import compute_metrics
from .sweep import PlanError, load_plan, rows_to_csv, run_sweep
from .tamper import ForgeryError, apply_forgery, dump_specs, load_specs

EXIT_CLEAN = 0
EXIT_ERROR = 1
EXIT_FORGED = 2


class CommandFailed(Exception):
    pass


def _config_options(fn):
    opts = [
        click.option("--block-size", "b", type=int, default=None, help="Block side b (default 16)."),
        click.option("--tl", "t_l", type=float, default=None, help="Feature distance threshold (default 0.014)."),
        click.option("--t2", "t_2", type=float, default=None, help="Minimum block separation (default 2b)."),
        click.option("--ts", "t_s", type=int, default=None, help="Shift vote threshold (default b+2)."),
        click.option("--tn", "t_n", type=int, default=None, help="Sorted neighbour window (default b)."),
        click.option("--signed-shift", is_flag=True, default=False, help="Vote on signed shift vectors."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(base: DetectorConfig, b, t_l, t_2, t_s, t_n, signed_shift) -> DetectorConfig:
    try:
        return base.with_overrides(
            b=b, t_l=t_l, t_2=t_2, t_s=t_s, t_n=t_n, signed_shift=signed_shift or None
        )
    except ValueError as exc:
        raise CommandFailed(f"invalid config: {exc}") from None


def _read_image(path: str):
    try:
        return load_image(path)
    except FileNotFoundError:
        raise CommandFailed(f"{path}: no such file") from None
    except ImageFormatError as exc:
        raise CommandFailed(str(exc)) from None


@click.group()
def cli():
    """Copy-move forgery detection with block DCT features."""


@cli.command("detect")
@click.argument("image")
@_config_options
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Where to write outputs (default: next to the image).")
@click.option("--figure", is_flag=True, help="Also write an image/mask figure.")
@click.option("--workers", type=int, default=None, help="Matching threads (default: DUPDETECT_THREADS).")
def detect_cmd(image, b, t_l, t_2, t_s, t_n, signed_shift, out_dir, figure, workers):
    """Detect duplicated regions in IMAGE.

    Writes <stem>.detected.png and <stem>.report.json.
    """
    config = _config(DetectorConfig(), b, t_l, t_2, t_s, t_n, signed_shift)
    img = _read_image(image)
    mask, report = detect(img, config, workers)
    src = Path(image)
    dest = Path(out_dir) if out_dir else src.parent
    dest.mkdir(parents=True, exist_ok=True)
    mask_path = dest / f"{src.stem}.detected.png"
    save_mask(mask, mask_path)
    (dest / f"{src.stem}.report.json").write_text(report.to_json() + "\n")
    if figure:
        from .plotting import plot_detection

        plot_detection(img, mask, dest / f"{src.stem}.figure.png")
    shifts = ", ".join(f"{s[0]}:{s[1]}x{c}" for s, c in report.shifts[:5])
    click.echo(f"{image}: {'DUPLICATED' if report.duplicated else 'clean'}"
               f" pixels={report.mask_pixels} shifts=[{shifts}]")
    return EXIT_FORGED if report.duplicated else EXIT_CLEAN


@cli.command("forge")
@click.argument("image")
@click.argument("spec")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--name", default=None, help="Output base name (default: spec file stem).")
def forge_cmd(image, spec, seed, out_dir, name):
    """Apply the copy-move SPEC to IMAGE.

    Writes <name>.png, <name>.mask.png and <name>.spec.
    """
    img = _read_image(image)
    try:
        specs = load_specs(spec)
        forged, truth = apply_forgery(img, specs, seed)
    except FileNotFoundError:
        raise CommandFailed(f"{spec}: no such file") from None
    except (ForgeryError, ValueError) as exc:
        raise CommandFailed(str(exc)) from None
    name = name or Path(spec).stem
    dest = Path(out_dir)
    dest.mkdir(parents=True, exist_ok=True)
    save_image(forged, dest / f"{name}.png")
    save_mask(truth, dest / f"{name}.mask.png")
    (dest / f"{name}.spec").write_text(dump_specs(specs if len(specs) > 1 else specs[0]) + "\n")
    click.echo(f"wrote {dest / name}.png ({int(truth.sum())} ground-truth pixels)")
    return EXIT_CLEAN


@cli.command("evaluate")
@click.argument("mask")
@click.argument("truth")
def evaluate_cmd(mask, truth):
    """Score a detected MASK against a ground-truth TRUTH mask (percent)."""
    try:
        report = compute_metrics(load_mask(mask), load_mask(truth))
    except FileNotFoundError as exc:
        raise CommandFailed(f"{exc.filename}: no such file") from None
    except ValueError as exc:
        raise CommandFailed(str(exc)) from None
    click.echo(str(report))
    return EXIT_CLEAN


@cli.command("sweep")
@click.argument("plan")
@_config_options
@click.option("--seed", type=int, default=None, help="Override the plan seed.")
@click.option("--out", "out", default=None, help="CSV path (default: <plan stem>.csv next to the plan).")
@click.option("--figure/--no-figure", default=True, show_default=True, help="Write a d/f plot next to the CSV.")
@click.option("--workers", type=int, default=None, help="Rows run concurrently (default: DUPDETECT_THREADS).")
def sweep_cmd(plan, b, t_l, t_2, t_s, t_n, signed_shift, seed, out, figure, workers):
    """Run an attack grid from PLAN and write one CSV row per parameter."""
    try:
        sweep_plan = load_plan(plan)
    except FileNotFoundError:
        raise CommandFailed(f"{plan}: no such file") from None
    except (PlanError, ForgeryError, ValueError) as exc:
        raise CommandFailed(str(exc)) from None
    sweep_plan = replace(sweep_plan, config=_config(sweep_plan.config, b, t_l, t_2, t_s, t_n, signed_shift))
    if seed is not None:
        sweep_plan = replace(sweep_plan, seed=seed)
    try:
        rows = run_sweep(sweep_plan, workers)
    except FileNotFoundError as exc:
        raise CommandFailed(f"{exc.filename}: no such file") from None
    except (ImageFormatError, ForgeryError) as exc:
        raise CommandFailed(str(exc)) from None
    out_path = Path(out) if out else Path(plan).with_suffix(".csv")
    out_path.write_text(rows_to_csv(rows))
    if figure:
        from .plotting import plot_sweep

        plot_sweep(rows, out_path.with_suffix(".png"), title=Path(plan).stem)
    for row in rows:
        status = row.error or (str(row.metrics) if row.metrics else "")
        click.echo(f"{row.attack} {row.param} {row.target}: {status}")
    click.echo(f"wrote {out_path}")
    return EXIT_CLEAN


def main(argv: Optional[list[str]] = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="dupdetect", standalone_mode=False)
    except CommandFailed as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_ERROR
    except click.exceptions.Exit as exc:
        return EXIT_CLEAN if exc.exit_code == 0 else EXIT_ERROR
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_ERROR
    except click.Abort:
        return EXIT_ERROR
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_ERROR
    return rv if isinstance(rv, int) else EXIT_CLEAN


if __name__ == "__main__":
    sys.exit(main())
