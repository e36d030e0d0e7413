"""Operator CLI: serve the API, run simulated episodes, analyze records."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .analytics import analysis_report, import_records
from .curriculum import bundled_curriculum_dir


@click.group()
def main():
    """Curriculum-driven tutorial dialogue engine."""


@main.command()
@click.option("--curriculum", "curriculum_dir", type=click.Path(exists=True),
              default=None, help="Curriculum directory (default: bundled demo).")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data", "data_dir", type=click.Path(), default=None,
              help="Directory for event logs, snapshots, and records.")
@click.option("--token", default=None, help="Require this X-Auth-Token header.")
@click.option("--stopwords", "stopwords_path", type=click.Path(exists=True),
              default=None, help="Replace the bundled stopword list.")
def serve(curriculum_dir, port, host, data_dir, token, stopwords_path):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    if stopwords_path:
        from .textmatch import set_default_stopwords
        set_default_stopwords(stopwords_path)
    app = create_app(
        curriculum=curriculum_dir or bundled_curriculum_dir(),
        data_dir=data_dir,
        auth_token=token,
    )
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--policy", required=True,
              help="perfect | ignorant | noisy:P | summaryonly:K")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--topic", "topic_id", required=True)
@click.option("--curriculum", "curriculum_dir", type=click.Path(exists=True),
              default=None)
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Write the episode report JSON here.")
def simulate(policy, seed, topic_id, curriculum_dir, report_path):
    """Run one simulated-student episode against an in-process service."""
    from .simstudent import run_episode

    episode = run_episode(topic_id, policy, seed, curriculum_dir=curriculum_dir)
    summary = {
        "policy": episode.policy,
        "seed": episode.seed,
        "topicId": episode.topic_id,
        "phaseTrace": episode.phase_trace,
        "roundsUsed": episode.rounds_used,
        "turnRatio": round(episode.turn_ratio, 4),
        "transcriptHash": episode.transcript_hash,
    }
    click.echo(json.dumps(summary, indent=2))
    if report_path:
        Path(report_path).write_text(json.dumps(episode.to_dict(), indent=2),
                                     encoding="utf-8")
        click.echo(f"report written to {report_path}")


@main.command()
@click.option("--records", "records_path", type=click.Path(exists=True),
              required=True, help="CSV of item response records.")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Write the JSON report here (default: stdout).")
@click.option("--design", default="condition*test", show_default=True)
def analyze(records_path, report_path, design):
    """Descriptives, logistic fit, and effect sizes for a record file."""
    records = import_records(records_path)
    report = analysis_report(records, design=design)
    text = json.dumps(report, indent=2)
    if report_path:
        Path(report_path).write_text(text, encoding="utf-8")
        click.echo(f"report written to {report_path}")
    else:
        click.echo(text)


if __name__ == "__main__":
    main()
