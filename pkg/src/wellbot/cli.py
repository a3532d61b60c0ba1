"""Command line entry points: serve, validate, replay, simulate."""

from __future__ import annotations

import sys

import click

from .config import ServiceConfig, load_config
from .content import default_library, load_content
from .emotions import TaxonomyError, default_wheel, load_taxonomy
from .engine import ReplayDivergence, UserEvent, UserProfile, advance, new_session
from .flows import FlowLoadError, default_flows, load_flow_set, parse_flow_set, validate_flow_set
from .instruments import InstrumentError, default_questionnaires, load_questionnaires
from .store import FileStore
from .therapy import TherapyScriptError, build_script


def _config_from(ctx_params: dict) -> ServiceConfig:
    config = load_config(ctx_params.get("config"))
    overrides = {
        "host": ctx_params.get("host"),
        "port": ctx_params.get("port"),
        "store_path": ctx_params.get("store"),
        "flows_path": ctx_params.get("flows"),
        "content_path": ctx_params.get("content"),
        "taxonomy_path": ctx_params.get("taxonomy"),
        "questionnaires_path": ctx_params.get("questionnaires"),
    }
    from dataclasses import replace

    return replace(config, **{k: v for k, v in overrides.items() if v is not None})


def _fixture_options(fn):
    for deco in (
        click.option("--config", type=click.Path(exists=True), help="YAML config file."),
        click.option("--flows", type=click.Path(exists=True), help="Flow fixture."),
        click.option("--content", type=click.Path(exists=True), help="Content fixture."),
        click.option("--taxonomy", type=click.Path(exists=True), help="Emotion taxonomy."),
        click.option("--questionnaires", type=click.Path(exists=True), help="Questionnaire tables."),
    ):
        fn = deco(fn)
    return fn


def _load_fixtures(config: ServiceConfig):
    flow_set = default_flows() if config.flows_path is None else load_flow_set(config.flows_path)
    library = default_library() if config.content_path is None else load_content(config.content_path)
    wheel = default_wheel() if config.taxonomy_path is None else load_taxonomy(config.taxonomy_path)
    return flow_set, library, wheel


@click.group()
def main() -> None:
    """Multimodal well-being companion."""


@main.command()
@click.option("--host", help="Bind address.")
@click.option("--port", type=int, help="Bind port.")
@click.option("--store", type=click.Path(), help="Directory for the append-only store.")
@_fixture_options
def serve(**params) -> None:
    """Run the HTTP gateway."""
    import uvicorn

    from .service import build_gateway, create_app

    config = _config_from(params)
    gateway = build_gateway(config)
    click.echo(f"serving on http://{config.host}:{config.port} (store: {config.store_path})")
    uvicorn.run(create_app(gateway), host=config.host, port=config.port, log_level="warning")


@main.command()
@_fixture_options
def validate(**params) -> None:
    """Check all fixtures and print diagnostics; exits non-zero on problems."""
    config = _config_from(params)
    failed = False

    try:
        import yaml

        if config.flows_path is None:
            flow_set = default_flows()
        else:
            from pathlib import Path

            from .flows import _resolve_tables

            path = Path(config.flows_path)
            doc = yaml.safe_load(path.read_text(encoding="utf-8"))
            if isinstance(doc, dict):
                _resolve_tables(doc, lambda rel: (path.parent / rel).read_text("utf-8"))
            flow_set = parse_flow_set(doc, source=str(path))
        diagnostics = validate_flow_set(flow_set)
        for diag in diagnostics:
            click.echo(f"flows: {diag}")
        if diagnostics:
            failed = True
        else:
            click.echo("flows: ok")
            try:
                build_script(flow_set)
                click.echo("therapy script: ok")
            except TherapyScriptError as exc:
                click.echo(f"therapy script: {exc}")
                failed = True
    except FlowLoadError as exc:
        for diag in exc.diagnostics:
            click.echo(f"flows: {diag}")
        failed = True

    for label, loader, default in (
        ("content", load_content, default_library),
        ("taxonomy", load_taxonomy, default_wheel),
        ("questionnaires", load_questionnaires, default_questionnaires),
    ):
        path = getattr(config, f"{label}_path")
        try:
            default() if path is None else loader(path)
            click.echo(f"{label}: ok")
        except (ValueError, TaxonomyError, InstrumentError) as exc:
            click.echo(f"{label}: {exc}")
            failed = True

    sys.exit(1 if failed else 0)


@main.command()
@click.option("--store", type=click.Path(exists=True), required=True, help="Store directory.")
@click.option("--session", "session_id", help="Replay one session instead of all.")
@_fixture_options
def replay(**params) -> None:
    """Re-run stored event logs and verify they reproduce exactly."""
    from .engine import event_from_doc
    from .engine import replay as replay_events
    from .engine import LogEntry
    from .service import profile_from_doc

    config = _config_from(params)
    flow_set, library, wheel = _load_fixtures(config)
    snapshot = FileStore(params["store"]).load_all()
    wanted = params.get("session_id")
    failures = 0
    count = 0
    for sid, record in sorted(snapshot.sessions.items()):
        if wanted and sid != wanted:
            continue
        count += 1
        profile = profile_from_doc(record.header.get("profile", {}))
        events = [event_from_doc(e.get("event")) for e in record.entries]
        expected = [
            LogEntry(
                event=ev,
                state_after=(str(e.get("flow")), str(e.get("state"))),
                response=str(e.get("response", "")).encode("utf-8"),
            )
            for ev, e in zip(events, record.entries)
        ]
        try:
            session = replay_events(
                events, flow_set, library, wheel, profile, sid, expected=expected
            )
            flow_id, state_id = session.current
            click.echo(f"{sid}: ok ({len(events)} events, at {flow_id}:{state_id})")
        except ReplayDivergence as exc:
            click.echo(f"{sid}: DIVERGED - {exc}")
            failures += 1
    if wanted and count == 0:
        click.echo(f"no stored session {wanted!r}")
        sys.exit(1)
    sys.exit(1 if failures else 0)


@main.command()
@click.option("--name", default="Maria", help="Display name for the demo profile.")
@click.option("--gender", default="unspecified", help="female, male or unspecified.")
@click.option("--script", "script_path", type=click.Path(exists=True), help="File with one input per line.")
@_fixture_options
def simulate(**params) -> None:
    """Drive a throwaway session from stdin or a script file.

    Plain lines are utterances. Prefixed lines send other event kinds:
    /button <intent>, /emotion <sector> <intensity>, /check tag1,tag2.
    """
    config = _config_from(params)
    flow_set, library, wheel = _load_fixtures(config)
    profile = UserProfile(user_id="demo", name=params["name"], gender=params["gender"])
    session = new_session("demo-session", profile, flow_set)

    from .protocol import visible_segments
    from .engine import render_current

    def show(payload) -> None:
        for segment in payload.speak:
            click.echo(f"  [voice] {segment}")
        for segment in visible_segments(payload):
            if segment not in payload.speak:
                click.echo(f"  [screen] {segment}")
        if payload.buttons:
            click.echo("  [buttons] " + " | ".join(b.label for b in payload.buttons))

    show(render_current(session, flow_set, library, wheel))

    if params.get("script_path"):
        with open(params["script_path"], "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    else:
        lines = (ln.rstrip("\n") for ln in sys.stdin)

    timestamp = 0.0
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        timestamp += 1.0
        if line.startswith("/button "):
            event = UserEvent.button(line.split(maxsplit=1)[1], timestamp)
        elif line.startswith("/emotion "):
            parts = line.split()
            if len(parts) != 3:
                click.echo("usage: /emotion <sector> <intensity>")
                continue
            event = UserEvent.emotion_selected(parts[1], parts[2], timestamp)
        elif line.startswith("/check "):
            tags = [t.strip() for t in line.split(maxsplit=1)[1].split(",") if t.strip()]
            event = UserEvent.checkbox_submit(tags, timestamp)
        else:
            event = UserEvent.utterance(line, timestamp)
        click.echo(f"> {line}")
        turn = advance(session, event, flow_set, library, wheel)
        session = turn.session
        show(turn.payload)
    flow_id, state_id = session.current
    click.echo(f"(ended at {flow_id}:{state_id})")


if __name__ == "__main__":
    main()
