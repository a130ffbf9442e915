"""HTTP session API over the labelling loop.

Thin shell around harness.Session: the human (or a scripted client)
replaces the simulated user, submitting label functions over JSON. One
outstanding query per session; submissions are idempotent per query
token so a retried request cannot double-consume budget. Sessions live
in process memory only.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse

from .core import (
    DataFormatError,
    Dataset,
    LabelFunction,
    apply_lf,
    load_tabular_csv,
    load_text_jsonl,
    split_dataset,
)
from .harness import ConfigError, Session, SessionConfig

AWAITING = "awaiting_lf"
FINISHED = "finished"

CONFIG_KEYS = {
    "budget",
    "eval_every",
    "sampler",
    "alpha",
    "acc_threshold",
    "noise_rate",
    "use_labelpick",
    "use_confusion",
    "l2",
    "glasso_lambda",
    "edge_tol",
    "min_rows",
    "max_vocab",
    "synth_n",
    "synth_flip",
    "synth_sep",
    "data_seed",
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(what: str) -> ApiError:
    return ApiError(404, "not_found", what)


def _invalid(message: str) -> ApiError:
    return ApiError(400, "invalid_config", message)


def _conflict(message: str) -> ApiError:
    return ApiError(409, "conflict", message)


@dataclass
class SessionRuntime:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    status: str = AWAITING
    query_token: str | None = None
    completed_token: str | None = None
    completed_payload: str | None = None
    completed_response: dict | None = None


def _query_payload(rt: SessionRuntime) -> dict | None:
    if rt.session.pending is None:
        return None
    inst = rt.session.dataset.instances[rt.session.pending]
    payload = {
        "query_token": rt.query_token,
        "instance_id": inst.id,
        "kind": rt.session.dataset.kind,
        "iteration": rt.session.iteration + 1,
        "budget": rt.session.config.budget,
    }
    if rt.session.dataset.kind == "text":
        payload["text"] = inst.raw_text
        payload["tokens"] = list(inst.payload)
    else:
        payload["features"] = [float(v) for v in inst.payload]
        payload["feature_names"] = rt.session.dataset.feature_names
    return payload


def _metrics_payload(rt: SessionRuntime) -> dict:
    s = rt.session
    checkpoints = [
        {
            "iteration": c.iteration,
            "test_acc": c.test_acc,
            "label_acc": None if c.label_acc != c.label_acc else c.label_acc,
            "coverage": c.coverage,
            "n_lfs_selected": c.n_lfs_selected,
            "tau": c.tau,
            "flagged": c.flagged,
        }
        for c in s.checkpoints
    ]
    return {
        "status": rt.status,
        "iteration": s.iteration,
        "budget": s.config.budget,
        "n_lfs": len(s.lfs),
        "tau": float(s.tau),
        "checkpoints": checkpoints,
        "selection": s.selection_report.to_dict() if s.selection_report else None,
    }


def _advance(rt: SessionRuntime) -> None:
    """Move to the next query or finish the session."""
    if rt.session.finished:
        rt.status = FINISHED
        rt.query_token = None
    else:
        rt.session.propose_query()
        rt.query_token = f"q{rt.session.iteration + 1}"


def _parse_lf(body: dict, kind: str) -> LabelFunction | None:
    if body.get("skip"):
        if "lf" in body and body["lf"] is not None:
            raise _invalid("a submission is either an LF or a skip, not both")
        return None
    spec = body.get("lf")
    if not isinstance(spec, dict):
        raise _invalid("body must contain an 'lf' object or 'skip': true")
    target = spec.get("target")
    if target not in (0, 1):
        raise _invalid("lf.target must be 0 or 1")
    lf_kind = spec.get("kind")
    try:
        if lf_kind == "keyword":
            if kind != "text":
                raise _invalid("keyword LFs apply to text datasets only")
            word = spec.get("word")
            if not isinstance(word, str) or not word:
                raise _invalid("lf.word must be a non-empty string")
            return LabelFunction.keyword(word.lower(), int(target))
        if lf_kind == "stump":
            if kind != "tabular":
                raise _invalid("stump LFs apply to tabular datasets only")
            return LabelFunction.stump(
                int(spec["feature"]), float(spec["value"]), spec.get("op", ""), int(target)
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise _invalid(f"malformed LF: {exc}") from None
    raise _invalid("lf.kind must be 'keyword' or 'stump'")


def create_app() -> FastAPI:
    app = FastAPI(title="labelloop")
    datasets: dict[str, Dataset] = {}
    sessions: dict[int, SessionRuntime] = {}
    counter = {"next": 1}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "invalid_request", "message": str(exc.errors())}
        )

    def get_runtime(session_id: int) -> SessionRuntime:
        rt = sessions.get(session_id)
        if rt is None:
            raise _not_found(f"no session {session_id}")
        return rt

    @app.post("/datasets")
    async def upload_dataset(file: UploadFile):
        import tempfile

        name = file.filename or ""
        if name.endswith(".jsonl") or name.endswith(".json"):
            loader, suffix = load_text_jsonl, ".jsonl"
        elif name.endswith(".csv"):
            loader, suffix = load_tabular_csv, ".csv"
        else:
            raise _invalid("upload a .jsonl text dataset or a .csv tabular dataset")
        content = await file.read()
        with tempfile.NamedTemporaryFile(suffix=suffix, mode="wb", delete=False) as tmp:
            tmp.write(content)
            path = tmp.name
        try:
            d = loader(path)
        except DataFormatError as exc:
            raise ApiError(400, "bad_dataset", str(exc)) from None
        with registry_lock:
            if name in datasets:
                raise _conflict(f"dataset {name!r} already uploaded")
            datasets[name] = d
        return {"dataset_id": name, "kind": d.kind, "n_instances": len(d)}

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise _invalid("body must be JSON") from None
        if not isinstance(body, dict) or "dataset" not in body:
            raise _invalid("body must include a 'dataset'")
        seed = body.get("seed", 0)
        if not isinstance(seed, int):
            raise _invalid("seed must be an integer")
        mode = body.get("mode")
        unknown = set(body) - CONFIG_KEYS - {"dataset", "seed", "mode"}
        if unknown:
            raise _invalid(f"unknown config keys: {sorted(unknown)}")
        overrides = {k: body[k] for k in CONFIG_KEYS if k in body}
        dataset_ref = body["dataset"]
        try:
            config = SessionConfig(dataset=dataset_ref, **overrides)
            if mode is not None:
                if mode == "al":
                    raise ConfigError("the pure-AL baseline is not an interactive mode")
                config = config.with_mode(mode)
            if dataset_ref.startswith("synth:"):
                session = Session(config, seed)
            else:
                base = datasets.get(dataset_ref)
                if base is None:
                    raise _not_found(f"no dataset {dataset_ref!r}")
                session = Session(config, seed, dataset=split_dataset(base, seed=seed))
        except ConfigError as exc:
            raise _invalid(str(exc)) from None
        except (TypeError, ValueError) as exc:
            raise _invalid(str(exc)) from None
        rt = SessionRuntime(session=session)
        if config.budget == 0:
            session.evaluate_checkpoint()
            rt.status = FINISHED
        else:
            _advance(rt)
        with registry_lock:
            session_id = counter["next"]
            counter["next"] += 1
            sessions[session_id] = rt
        return {
            "session_id": session_id,
            "status": rt.status,
            "query": _query_payload(rt),
        }

    @app.get("/sessions/{session_id}/query")
    async def get_query(session_id: int):
        rt = get_runtime(session_id)
        with rt.lock:
            if rt.status == FINISHED:
                raise _conflict("session is finished")
            return {"status": rt.status, "query": _query_payload(rt)}

    @app.post("/sessions/{session_id}/lf")
    async def submit_lf(session_id: int, request: Request):
        rt = get_runtime(session_id)
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise _invalid("body must be JSON") from None
        payload_key = json.dumps(body, sort_keys=True)
        with rt.lock:
            token = body.get("query_token")
            if token and token == rt.completed_token:
                if payload_key == rt.completed_payload:
                    return rt.completed_response  # idempotent retry
                raise _conflict("query token already consumed with a different submission")
            if rt.status == FINISHED:
                raise _conflict("session is finished")
            if token != rt.query_token:
                raise _conflict(f"stale or unknown query token {token!r}")
            session = rt.session
            lf = _parse_lf(body, session.dataset.kind)
            if lf is not None:
                query_instance = session.dataset.instances[session.pending]
                if apply_lf(lf, query_instance) == -1:
                    raise ApiError(400, "lf_abstains", "LF must label its query")
            session.apply_response(lf)
            rt.completed_token = token
            rt.completed_payload = payload_key
            _advance(rt)
            response = {
                "accepted": lf is not None,
                "metrics": _metrics_payload(rt),
                "query": _query_payload(rt),
            }
            rt.completed_response = response
            return response

    @app.get("/sessions/{session_id}/metrics")
    async def get_metrics(session_id: int):
        rt = get_runtime(session_id)
        with rt.lock:
            return _metrics_payload(rt)

    @app.get("/sessions/{session_id}/export")
    async def export_labels(session_id: int):
        rt = get_runtime(session_id)
        with rt.lock:
            if not rt.session.checkpoints:
                raise _conflict("no checkpoint yet; nothing to export")
            lines = [json.dumps(row) for row in rt.session.export_rows()]
        return PlainTextResponse("\n".join(lines) + "\n", media_type="application/jsonl")

    return app
