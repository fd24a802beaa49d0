"""Command line surface: interactive chat, flow linting, scripted simulation,
log analytics, and the HTTP server.
"""

from __future__ import annotations

import json
import os
import sys
import uuid
from pathlib import Path

import click

from .analytics import (
    ab_test,
    components_report,
    daily_means,
    filter_min_turns,
    load_records,
    record_to_dict,
    render_ab_table,
    render_components_table,
    rolling_csv,
)
from .defaults import packaged_flow_dir, packaged_ontology
from .flows import lint_files
from .persistence import DiskStore, MemoryStore
from .service import ChatService, build_service


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


def _flow_files(flow_dir: str | None) -> list[tuple[str, str]]:
    path = Path(flow_dir) if flow_dir else packaged_flow_dir()
    return [(p.name, p.read_text(encoding="utf-8")) for p in sorted(path.glob("*.flow"))]


def _make_store(store_dir: str | None):
    store_dir = store_dir or os.environ.get("EMORETTE_STORE_DIR")
    return DiskStore(store_dir) if store_dir else MemoryStore()


@click.group()
def main():
    """Socialbot engine tools."""


@main.command()
@click.option("--flows", "flow_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory of .flow files (packaged demo flows by default).")
@click.option("--seed", type=int, default=None, help="Session random seed.")
@click.option("--store", "store_dir", type=click.Path(file_okay=False), default=None)
@click.option("--debug", is_flag=True, help="Show variables, stack, and features per turn.")
def chat(flow_dir, seed, store_dir, debug):
    """Interactive chat REPL."""
    seed = seed if seed is not None else _env_int("EMORETTE_SEED", 0)
    service = build_service(flow_dir, store=_make_store(store_dir), seed=seed)
    session_id = f"repl-{uuid.uuid4().hex[:8]}"
    opening = service.ensure_session(session_id)
    if opening:
        click.echo(f"bot : {opening}")
    while True:
        try:
            line = click.prompt("you ", prompt_suffix="> ")
        except (EOFError, KeyboardInterrupt, click.Abort):
            click.echo()
            break
        if line.strip() in ("/quit", "/exit"):
            break
        if not line.strip():
            continue
        result = service.chat(session_id, line, debug=debug)
        click.echo(f"bot : {result.response}")
        if debug and result.debug:
            block = result.debug
            click.echo(f"  state: {block['state']}")
            click.echo(f"  vars : {json.dumps(block['variables'], sort_keys=True)}")
            click.echo(f"  stack: {json.dumps(block['stack'])}")
            feats = block["features"]
            topic = feats["topic_dist"] or {}
            intent = feats["intent_dist"] or {}
            click.echo(
                f"  nlp  : sentiment={feats['sentiment']}"
                f" topic={max(topic, key=topic.get) if topic else None}"
                f" intent={max(intent, key=intent.get) if intent else None}"
                f" entities={[m['surface'] for m in feats['entities']]}"
            )


@main.command()
@click.option("--flows", "flow_dir", type=click.Path(exists=True, file_okay=False), default=None)
def lint(flow_dir):
    """Check flow files; exit nonzero on any error-severity diagnostic."""
    ont = packaged_ontology()
    graph, diagnostics = lint_files(_flow_files(flow_dir), ont)
    for diag in diagnostics:
        click.echo(str(diag))
    errors = sum(1 for d in diagnostics if d.severity == "error")
    if not diagnostics:
        click.echo("clean: no diagnostics")
    click.echo(f"{len(diagnostics)} diagnostic(s), {errors} error(s)")
    sys.exit(1 if errors else 0)


@main.command()
@click.option("--flows", "flow_dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--script", "script_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seed", type=int, default=0)
def simulate(flow_dir, script_path, seed):
    """Replay a script of user utterances, checking its expectations."""
    exit_code = run_simulation(flow_dir, script_path, seed, click.echo)
    sys.exit(exit_code)


def run_simulation(flow_dir, script_path, seed, echo) -> int:
    """Drive a scripted conversation; returns 0 iff every assertion holds."""
    script = json.loads(Path(script_path).read_text(encoding="utf-8"))
    session_id = script.get("session", "sim")
    service = build_service(flow_dir, store=MemoryStore(), seed=seed)
    failures: list[str] = []
    last_debug: dict = {}

    opening = service.ensure_session(session_id)
    if opening:
        echo(f"[0] bot : {opening}")

    for number, turn in enumerate(script.get("turns", []), start=1):
        utterance = turn["say"]
        result = service.chat(session_id, utterance, debug=True)
        echo(f"[{number}] user: {utterance}")
        echo(f"[{number}] bot : {result.response}")
        last_debug = result.debug or {}

        expect = turn.get("expect") or {}
        if "response" in expect and result.response != expect["response"]:
            failures.append(
                f"turn {number}: response mismatch:\n  expected: {expect['response']}\n  actual:   {result.response}"
            )
        if "vars" in expect:
            actual_vars = last_debug.get("variables", {})
            if actual_vars != expect["vars"]:
                failures.append(
                    f"turn {number}: variables mismatch:\n"
                    f"  expected: {json.dumps(expect['vars'], sort_keys=True)}\n"
                    f"  actual:   {json.dumps(actual_vars, sort_keys=True)}"
                )
        if "stack" in expect:
            # Stack expectations are bottom-to-top state ids.
            actual_stack = [e["state"] for e in reversed(last_debug.get("stack", []))]
            if actual_stack != expect["stack"]:
                failures.append(
                    f"turn {number}: stack mismatch:\n"
                    f"  expected: {expect['stack']}\n  actual:   {actual_stack}"
                )

    echo(f"final state: {last_debug.get('state')}")
    echo(f"final variables: {json.dumps(last_debug.get('variables', {}), sort_keys=True)}")
    echo(f"final stack: {json.dumps(last_debug.get('stack', []))}")
    for failure in failures:
        echo(failure)
    echo(f"{len(script.get('turns', []))} turn(s), {len(failures)} failure(s)")
    return 1 if failures else 0


@main.command()
@click.option("--logs", "log_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--report", type=click.Choice(["components", "ab", "rolling"]), required=True)
@click.option("--min-turns", type=int, default=None,
              help="Drop conversations with this many turns or fewer.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def analyze(log_path, report, min_turns, fmt):
    """Reports over a newline-delimited JSON conversation log."""
    records = load_records(Path(log_path).read_text(encoding="utf-8"))
    if min_turns is not None:
        records = filter_min_turns(records, min_turns)

    if report == "components":
        rows = components_report(records)
        if fmt == "json":
            click.echo(json.dumps([row.__dict__ for row in rows], indent=2, sort_keys=True))
        else:
            click.echo(render_components_table(rows))
    elif report == "ab":
        arms: dict[str, list[float]] = {}
        for record in records:
            if record.variant and record.rating is not None:
                arms.setdefault(record.variant, []).append(record.rating)
        if len(arms) != 2:
            raise click.ClickException(
                f"ab report needs exactly 2 variants, found {sorted(arms)}"
            )
        (label_a, arm_a), (label_b, arm_b) = sorted(arms.items())
        result = ab_test(arm_a, arm_b)
        if fmt == "json":
            click.echo(json.dumps(result.__dict__, indent=2, sort_keys=True))
        else:
            click.echo(render_ab_table(label_a, label_b, result))
    else:
        click.echo(rolling_csv(daily_means(records)))


@main.command()
@click.option("--flows", "flow_dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--port", type=int, default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--seed", type=int, default=None)
@click.option("--store", "store_dir", type=click.Path(file_okay=False), default=None)
@click.option("--variant", default=None, help="Experiment arm label stamped on rating records.")
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="Static directory to serve at / (the web chat build).")
def serve(flow_dir, port, host, seed, store_dir, variant, ui_dir):
    """Run the HTTP chat service."""
    import uvicorn

    from .server import create_app

    seed = seed if seed is not None else _env_int("EMORETTE_SEED", 0)
    port = port if port is not None else _env_int("EMORETTE_PORT", 8080)
    service = build_service(
        flow_dir, store=_make_store(store_dir), seed=seed, variant=variant
    )
    app = create_app(service, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
