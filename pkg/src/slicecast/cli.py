"""Command-line front end: render, bench, diff, gen-dataset, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import bench as bench_mod
from . import datasets as ds_mod
from .config import METHODS, load_scene
from .errors import ConfigError
from .image import diff_metrics, read_image, write_image
from .volume import DescriptorError, FormatError


@click.group()
def main():
    """Slice-based ray casting volume renderer."""


@main.command("render")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output image (.png or .ppm).")
@click.option("--threads", type=int, default=None)
@click.option("--seed", type=int, default=None, help="Override synthetic-dataset seed.")
@click.option("--dump-light-layer", type=int, default=None,
              help="Also write attenuation-buffer layer K (use -1 for the last) next to the output.")
def cmd_render(config_path, out, threads, seed, dump_light_layer):
    """Render one frame from a scene config."""
    try:
        scene = load_scene(config_path, out=out, threads=threads, seed=seed)
    except (ConfigError, DescriptorError, FormatError, OSError) as exc:
        raise click.UsageError(str(exc))
    if scene.output is None:
        raise click.UsageError("no output path: set 'output' in the config or pass --out")

    if dump_light_layer is not None and scene.method == "has":
        raise click.UsageError("--dump-light-layer needs a buffer-based method")

    img, build_ms, render_ms, passes = bench_mod.render_scene(scene)
    write_image(scene.output, img)
    if dump_light_layer is not None:
        if not scene.needs_buffer:
            raise click.UsageError("--dump-light-layer needs a buffer-based method")
        # Rebuild is cheap relative to clarity; render_scene does not expose the buffer.
        from .lightbuffer import LightCamera, build_attenuation_buffer
        from .slicing import make_slice_stack

        bp = scene.buffer_params
        cam = LightCamera.fit(scene.settings.light.direction, scene.settings.light.color, bp.resolution)
        stack = make_slice_stack(scene.settings.light.direction, bp.n_slices)
        buf = build_attenuation_buffer(scene.volume, scene.tf, cam, stack, bp.compensation_n)
        k = dump_light_layer if dump_light_layer >= 0 else bp.n_slices + dump_light_layer
        layer_path = Path(scene.output).with_suffix("") .as_posix() + f".layer{k}.png"
        write_image(layer_path, buf.layer(k))
        click.echo(f"light layer {k} -> {layer_path}")
    click.echo(
        f"method={scene.method} build_ms={build_ms:.2f} render_ms={render_ms:.2f} "
        f"passes={passes} out={scene.output}"
    )


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_resolutions(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "x" in tok:
            w, h = tok.split("x")
            out.append((int(w), int(h)))
        else:
            out.append((int(tok), int(tok)))
    return out


@main.command("bench")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output (default stdout).")
@click.option("--methods", default="sbrc", show_default=True,
              help=f"Comma list from {','.join(METHODS)}.")
@click.option("--slices", default="64,128,256", show_default=True)
@click.option("--resolutions", default="128,256,512", show_default=True,
              help="Comma list; either N or WxH per entry.")
@click.option("--repeats", default=3, show_default=True, type=int)
@click.option("--threads", type=int, default=None)
@click.option("--seed", type=int, default=None)
def cmd_bench(config_path, out, methods, slices, resolutions, repeats, threads, seed):
    """Sweep slice counts and buffer resolutions; write one CSV row each."""
    try:
        scene = load_scene(config_path, threads=threads, seed=seed)
        method_list = [m.strip() for m in methods.split(",") if m.strip()]
        for m in method_list:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        slice_list = _parse_int_list(slices)
        res_list = _parse_resolutions(resolutions)
        if not method_list or not slice_list or not res_list:
            raise ConfigError("sweep lists must be non-empty")
        if repeats < 3:
            raise ConfigError("--repeats must be >= 3")
    except (ConfigError, DescriptorError, FormatError, OSError) as exc:
        raise click.UsageError(str(exc))

    records = bench_mod.run_sweep(scene, method_list, slice_list, res_list, repeats=repeats)
    if out:
        bench_mod.write_csv(records, out)
        click.echo(f"{len(records)} rows -> {out}")
    else:
        sys.stdout.write(bench_mod.csv_text(records))


@main.command("diff")
@click.argument("image_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("image_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-abs", type=float, default=None, help="Fail if max abs diff exceeds this.")
@click.option("--mean-abs", type=float, default=None, help="Fail if mean abs diff exceeds this.")
def cmd_diff(image_a, image_b, max_abs, mean_abs):
    """Compare two images; exit 1 when thresholds are exceeded."""
    try:
        metrics = diff_metrics(read_image(image_a), read_image(image_b))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"max_abs={metrics['max_abs']:.6f} mean_abs={metrics['mean_abs']:.6f}")
    click.echo(f"per_channel_max={metrics['per_channel_max']}")
    click.echo(f"per_channel_mean={metrics['per_channel_mean']}")
    failed = (max_abs is not None and metrics["max_abs"] > max_abs) or (
        mean_abs is not None and metrics["mean_abs"] > mean_abs
    )
    if failed:
        raise SystemExit(1)


@main.command("gen-dataset")
@click.argument("name", type=click.Choice(ds_mod.SYNTHETIC_NAMES))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Target .raw path.")
@click.option("--dims", default="64,64,64", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--scalar-type", default="u8", show_default=True,
              type=click.Choice(["u8", "u16", "f32"]))
def cmd_gen_dataset(name, out, dims, seed, scalar_type):
    """Write a synthetic dataset as .raw plus its JSON descriptor."""
    d = tuple(_parse_int_list(dims))
    if len(d) != 3:
        raise click.UsageError("--dims needs three comma-separated integers")
    volume = ds_mod.synthetic(name, dims=d, seed=seed)
    path = ds_mod.save_raw(volume, out, scalar_type=scalar_type)
    click.echo(f"{name} {d[0]}x{d[1]}x{d[2]} ({scalar_type}) -> {path}")


@main.command("serve")
@click.option("--port", default=8571, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--max-concurrency", default=4, show_default=True, type=int)
@click.option("--static-dir", type=click.Path(file_okay=False), default=None,
              help="Serve a built viewer bundle at /.")
def cmd_serve(port, host, data_dir, max_concurrency, static_dir):
    """Run the stateless render service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=data_dir, max_concurrency=max_concurrency, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
