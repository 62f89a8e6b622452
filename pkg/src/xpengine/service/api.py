"""HTTP facade: experiment submission, state, SSE events, prompts, KR queries.

Transport is HTTP/1.1 JSON plus server-sent events for `/events`; everything
a dashboard shows is reconstructible by replaying the event stream from
seq 0. Handlers run concurrently; engine mutations go through EngineService.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse

from ..canonical import canonical_json
from ..errors import NoContextError, StaleResponseError, UnknownConfigError
from ..kg.embed import recommend
from ..kg.graph import lineage
from ..records import RunRecord
from .engine import EngineService, ExperimentHandle

_KEEPALIVE_S = 10.0


def _run_row(record: RunRecord) -> dict:
    return {
        "ordinal": record.ordinal,
        "run_id": record.run_id,
        "assignment": record.assignment,
        "status": record.status.value,
        "cache_hit": record.cache_hit,
        "feasible": record.feasible,
        "metrics": record.metrics,
        "verdicts": [v.to_obj() for v in record.verdicts],
        "cost": record.cost.to_obj(),
    }


def _summary(handle: ExperimentHandle) -> dict:
    runner = handle.runner
    obj = {
        "id": handle.spec.name,
        "status": handle.status,
        "runs": len(runner.results) if runner else 0,
        "intent": {
            "direction": handle.spec.intent.direction.value,
            "metric": handle.spec.intent.metric,
        },
        "strategy": handle.spec.strategy.kind.value,
        "error": handle.error,
    }
    if runner is not None:
        obj["budget"] = {
            "total_min": runner.budget.total_min,
            "used_min": runner.budget.used_min,
        }
    if handle.report is not None:
        obj["best"] = handle.report.best
        obj["totals"] = handle.report.totals.to_obj()
    return obj


def create_app(service: EngineService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="xpengine", version="0.1.0")

    @app.post("/experiments")
    async def submit_experiment(
        request: Request,
        seed: int | None = Query(default=None),
        workers: int = Query(default=1),
    ):
        source = (await request.body()).decode("utf-8", errors="replace")
        try:
            experiment_id, errors = service.submit(source, seed=seed, workers=workers)
        except FileExistsError as exc:
            return JSONResponse({"error": f"experiment '{exc}' already exists"}, status_code=409)
        if errors:
            return JSONResponse({"errors": errors}, status_code=422)
        return JSONResponse({"id": experiment_id}, status_code=201)

    @app.get("/experiments")
    def list_experiments():
        return {"experiments": [_summary(h) for h in service.list()]}

    @app.get("/experiments/{experiment_id}")
    def get_experiment(experiment_id: str):
        handle = service.get(experiment_id)
        if handle is None:
            return JSONResponse({"error": "unknown experiment"}, status_code=404)
        return _summary(handle)

    @app.get("/experiments/{experiment_id}/runs")
    def get_runs(experiment_id: str):
        handle = service.get(experiment_id)
        if handle is None:
            return JSONResponse({"error": "unknown experiment"}, status_code=404)
        records = handle.runner.results if handle.runner else []
        return {"runs": [_run_row(r) for r in records]}

    @app.get("/experiments/{experiment_id}/events")
    def get_events(
        experiment_id: str,
        since: int = Query(default=0),
        follow: int = Query(default=1),
    ):
        handle = service.get(experiment_id)
        if handle is None:
            return JSONResponse({"error": "unknown experiment"}, status_code=404)

        def stream() -> Iterator[str]:
            cursor = since
            while True:
                batch = handle.events.since(cursor)
                for event in batch:
                    cursor = event.seq
                    yield f"id: {event.seq}\ndata: {canonical_json(event.to_obj())}\n\n"
                if not follow:
                    if not batch:
                        return  # replay mode: drain the backlog and close
                    continue
                fresh = handle.events.wait_for(cursor, timeout=_KEEPALIVE_S)
                if not fresh:
                    yield ": keepalive\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/prompts/{prompt_id}/response")
    async def respond_prompt(prompt_id: str, request: Request):
        body = await request.json()
        try:
            service.resolve_prompt(prompt_id, body)
        except KeyError:
            return JSONResponse({"error": "unknown prompt"}, status_code=404)
        except StaleResponseError:
            return JSONResponse({"error": "prompt already resolved"}, status_code=409)
        except UnknownConfigError as exc:
            return JSONResponse(
                {"error": "UnknownConfig", "targets": exc.targets}, status_code=422
            )
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return {"ok": True}

    @app.post("/experiments/{experiment_id}/production-metrics")
    async def ingest_production_metric(experiment_id: str, request: Request):
        body = await request.json()
        try:
            result = service.ingest_production_metric(
                experiment_id, str(body.get("metric", "")), float(body.get("value", 0.0))
            )
        except KeyError:
            return JSONResponse({"error": "unknown experiment"}, status_code=404)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return result

    @app.get("/kr/recommendations")
    def get_recommendations(
        user: str = Query(default=""),
        dataset: str = Query(default=""),
        intent: str = Query(default=""),
        relation: str = Query(default="usesAlgorithm"),
        k: int = Query(default=3),
    ):
        try:
            table = service.embeddings()
            ranked = recommend(
                table,
                service.store.kg,
                {"user": user, "dataset": dataset, "intent": intent},
                relation,
                k,
            )
        except (NoContextError, ValueError) as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        except Exception as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return {
            "items": [
                {"kind": e.kind.value, "id": e.id, "score": score} for e, score in ranked
            ]
        }

    @app.get("/kr/lineage")
    def get_lineage(
        experiment: str | None = Query(default=None),
        dataset: str | None = Query(default=None),
        fingerprint: str | None = Query(default=None),
    ):
        try:
            records = lineage(
                service.store.kg,
                experiment=experiment,
                dataset=dataset,
                fingerprint=fingerprint,
            )
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return {"runs": [r.to_obj() for r in records]}

    @app.get("/healthz")
    def health() -> Response:
        return Response("ok", media_type="text/plain")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
