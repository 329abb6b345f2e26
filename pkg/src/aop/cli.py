"""Command line front end; per-instance commands go through the HTTP service.

Without --url an in-process client is used, so no server has to run; with
--url the same requests hit a remote `aop serve` instance. Exit codes:
0 success, 1 invalid input, 2 invariant/verification failure.
"""

from __future__ import annotations

import json
import sys
from functools import wraps

import click
import httpx

from . import __version__
from .core import InvariantViolation, ValidationError
from .schemas import (
    CircuitModel,
    InstanceModel,
    NetlistModel,
    load_circuit,
    load_instance,
    load_netlist,
    save_circuit,
)

EXIT_VALIDATION = 1
EXIT_INVARIANT = 2


class _InProcessClient:
    """Runs requests against the ASGI app directly; no server required."""

    def __init__(self, app):
        self._app = app

    def post(self, path: str, json) -> httpx.Response:
        import asyncio

        async def go():
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://aop.internal"
            ) as client:
                return await client.post(path, json=json)

        return asyncio.run(go())

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _client(url: str | None):
    if url:
        return httpx.Client(base_url=url, timeout=300.0)
    from .service import app

    return _InProcessClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code >= 400:
        try:
            body = resp.json()
            detail, kind = body.get("detail"), body.get("kind")
        except ValueError:
            detail, kind = resp.text, None
        click.echo(f"error: {detail}", err=True)
        sys.exit(EXIT_INVARIANT if kind == "invariant" else EXIT_VALIDATION)
    return resp.json()


def _guarded(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except InvariantViolation as exc:
            click.echo(f"invariant violation: {exc}", err=True)
            sys.exit(EXIT_INVARIANT)

    return wrapper


def _write_out(text: str, output: str | None) -> None:
    if output is None or output == "-":
        click.echo(text, nl=not text.endswith("\n"))
    else:
        with open(output, "w") as fh:
            fh.write(text)


@click.group()
@click.version_option(__version__)
def main():
    """Small-delay circuits for And-Or paths with prescribed arrival times."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["delay", "delay-size"]), default="delay")
@click.option("--emit", type=click.Choice(["circuit", "dot"]), default="circuit")
@click.option("--output", default=None, help="Output file; stdout by default.")
@click.option("--url", default=None, help="Remote service URL; in-process otherwise.")
@_guarded
def optimize(input_path, mode, emit, output, url):
    """Optimize an instance file and emit the resulting circuit."""
    inst = load_instance(input_path)
    with _client(url) as client:
        data = _post(
            client,
            "/optimize",
            {
                "instance": InstanceModel.from_instance(inst).model_dump(),
                "mode": mode,
            },
        )
    click.echo(f"delay={data['delay']:g} size={data['size']} mode={data['mode']}", err=True)
    model = CircuitModel.model_validate(data["circuit"])
    if emit == "circuit":
        _write_out(model.model_dump_json(indent=2, exclude_none=True) + "\n", output)
    else:
        from .harness import emit_dot

        _write_out(emit_dot(model.to_circuit()), output)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--url", default=None)
@_guarded
def lb(input_path, url):
    """Print the delay lower bound report for an instance file."""
    inst = load_instance(input_path)
    with _client(url) as client:
        data = _post(
            client,
            "/lower-bound",
            {"instance": InstanceModel.from_instance(inst).model_dump()},
        )
    click.echo(f"kraft={data['kraft']:g}")
    click.echo(f"input_depth={data['input_depth']:g}")
    click.echo(f"combined={data['combined']:g}")
    for d in data["details"]:
        click.echo(
            f"  t{d['input']}: arrival={d['arrival']:g} "
            f"min_gates={d['min_gates']} bound={d['bound']:g}"
        )


@main.command()
@click.option("--circuit", "circuit_path", required=True, type=click.Path(exists=True))
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--url", default=None)
@_guarded
def verify(circuit_path, instance_path, url):
    """Check a circuit file structurally and against an instance's function."""
    circuit = load_circuit(circuit_path)
    inst = load_instance(instance_path)
    with _client(url) as client:
        data = _post(
            client,
            "/verify",
            {
                "circuit": CircuitModel.from_circuit(circuit).model_dump(exclude_none=True),
                "instance": InstanceModel.from_instance(inst).model_dump(),
            },
        )
    click.echo(f"structural_ok={data['structural_ok']}")
    click.echo(f"equivalent={data['equivalent']}")
    if data["delay"] is not None:
        click.echo(f"delay={data['delay']:g} size={data['size']}")
    for v in data["violations"]:
        click.echo(f"violation: {v}")
    if not (data["structural_ok"] and data["equivalent"]):
        sys.exit(EXIT_INVARIANT)


@main.command()
@click.option("--netlist", "netlist_path", required=True, type=click.Path(exists=True))
@click.option("--critical-input", required=True)
@click.option("--dgate", required=True, type=float, help="Gate delay in ps.")
@click.option("--ddist", required=True, type=float, help="Wire delay in ps per um (L1).")
@click.option("--out-instance", default=None, help="Write the instance file here.")
@click.option("--out-mapping", default=None, help="Write the back-mapping JSON here.")
@click.option("--url", default=None)
@_guarded
def normalize(netlist_path, critical_input, dgate, ddist, out_instance, out_mapping, url):
    """Normalize a placed netlist path into an And-Or path instance."""
    netlist = load_netlist(netlist_path)
    with _client(url) as client:
        data = _post(
            client,
            "/normalize",
            {
                "netlist": NetlistModel.from_netlist(netlist).model_dump(),
                "critical_input": critical_input,
                "d_gate": dgate,
                "d_dist": ddist,
            },
        )
    inst = data["instance"]
    click.echo(
        f"m={inst['m']} variant={inst['variant']} "
        f"output_inverted={data['output_inverted']} multipath={data['multipath']}",
        err=True,
    )
    if out_instance:
        with open(out_instance, "w") as fh:
            json.dump(inst, fh, indent=2)
            fh.write("\n")
    mapping = {
        "input_map": data["input_map"],
        "output_inverted": data["output_inverted"],
        "output_location": data["output_location"],
        "multipath": data["multipath"],
    }
    if out_mapping:
        with open(out_mapping, "w") as fh:
            json.dump(mapping, fh, indent=2)
            fh.write("\n")
    if not out_instance and not out_mapping:
        click.echo(json.dumps({"instance": inst, **mapping}, indent=2))


@main.command()
@click.option("--m-min", default=4, type=int)
@click.option("--m-max", default=28, type=int)
@click.option("--count", default=1000, type=int, help="Instances per input count.")
@click.option("--seed", default=1, type=int)
@click.option(
    "--baselines",
    default="r2006,hs2017,immediate",
    help="Comma-separated families; empty for none.",
)
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--size-mode/--no-size-mode", default=True)
@_guarded
def bench(m_min, m_max, count, seed, baselines, csv_path, size_mode):
    """Run the benchmark locally and print per-m summary statistics."""
    from .harness import BenchConfig, format_summary, run_bench

    fams = tuple(f for f in baselines.split(",") if f) if baselines else ()
    cfg = BenchConfig(
        m_min=m_min,
        m_max=m_max,
        count=count,
        seed=seed,
        baselines=fams,
        with_size_mode=size_mode,
    )
    result = run_bench(cfg, csv_path=csv_path, progress=lambda s: click.echo(s, err=True))
    click.echo(format_summary(result.summary))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
