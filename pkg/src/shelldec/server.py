"""HTTP session API behind the interactive curve explorer.

JSON over HTTP; curves travel as parallel r/f arrays.  Sessions hold
acquired curves, their decompositions and a per-curve edited term list for
what-if recomputation.  Session ids are sequential, so replaying a
recorded call log against a fresh server reproduces identical responses.

Endpoints:
    POST /api/session                               -> {"session": id}
    POST /api/session/import        (snapshot body) -> {"session": id}
    GET  /api/session/<id>/snapshot
    GET  /api/table                                 -> scatterer labels
    POST /api/session/<id>/curve                    -> acquire a curve
    POST /api/session/<id>/curve/<label>/decompose
    POST /api/session/<id>/curve/<label>/edit       -> what-if recompute
    POST /api/session/<id>/plot                     -> series bundle
    POST /api/session/<id>/export                   -> curve-file text
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import fileio
from .atoms import AtomImageSpec, atom_image, load_scattering_table
from .decompose import DecomposeConfig, decompose
from .expr import ExpressionError, parse, sample
from .shells import GridError, SampledCurve, ShellTerm, evaluate_sum


class ApiError(Exception):
    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


@dataclass
class EditedTerm:
    R: float
    B: float
    C: float
    enabled: bool = True

    def as_shell_term(self) -> ShellTerm:
        return ShellTerm(self.R, self.B, self.C)

    def to_json(self) -> dict:
        return {"R": self.R, "B": self.B, "C": self.C, "enabled": self.enabled}


@dataclass
class Session:
    curves: dict[str, SampledCurve] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)
    decompositions: dict[str, dict] = field(default_factory=dict)
    edited: dict[str, list[EditedTerm]] = field(default_factory=dict)
    eps_term: dict[str, float] = field(default_factory=dict)
    plot_selections: list[dict] = field(default_factory=list)
    curve_counter: int = 0
    lock: threading.RLock = field(default_factory=threading.RLock)


class SessionApi:
    """All endpoint logic, independent of the HTTP plumbing."""

    def __init__(self, table_path):
        self.scatterers = {sf.label: sf for sf in load_scattering_table(table_path)}
        self.sessions: dict[str, Session] = {}
        self._counter = 0
        self._lock = threading.Lock()

    # -- session management -------------------------------------------------

    def create_session(self) -> dict:
        with self._lock:
            self._counter += 1
            sid = f"s{self._counter}"
            self.sessions[sid] = Session()
        return {"session": sid}

    def _session(self, sid: str) -> Session:
        try:
            return self.sessions[sid]
        except KeyError:
            raise ApiError(f"unknown session {sid!r}", status=404) from None

    def snapshot(self, sid: str) -> dict:
        s = self._session(sid)
        with s.lock:
            return {
                "curves": [
                    {
                        "label": label,
                        "r": s.curves[label].r.tolist(),
                        "f": s.curves[label].f.tolist(),
                    }
                    for label in s.order
                ],
                "decompositions": s.decompositions,
                "edited": {
                    label: [t.to_json() for t in terms]
                    for label, terms in s.edited.items()
                },
                "eps_term": s.eps_term,
                "plot_selections": s.plot_selections,
                "curve_counter": s.curve_counter,
            }

    def import_session(self, body: dict) -> dict:
        sid = self.create_session()["session"]
        s = self._session(sid)
        with s.lock:
            for item in body.get("curves", []):
                label = item["label"]
                s.curves[label] = SampledCurve(
                    np.asarray(item["r"], dtype=float),
                    np.asarray(item["f"], dtype=float),
                    label=label,
                )
                s.order.append(label)
            s.decompositions = dict(body.get("decompositions", {}))
            s.edited = {
                label: [EditedTerm(**t) for t in terms]
                for label, terms in body.get("edited", {}).items()
            }
            s.eps_term = {k: float(v) for k, v in body.get("eps_term", {}).items()}
            s.plot_selections = list(body.get("plot_selections", []))
            s.curve_counter = int(body.get("curve_counter", 0))
        return {"session": sid}

    def table(self) -> dict:
        return {"scatterers": list(self.scatterers)}

    # -- step a: curve acquisition -------------------------------------------

    def create_curve(self, sid: str, body: dict) -> dict:
        s = self._session(sid)
        source = body.get("source")
        with s.lock:
            if source == "file":
                curve = self._curve_from_file(body)
            elif source == "atom":
                curve = self._curve_from_atom(body)
            elif source == "expression":
                curve = self._curve_from_expression(body)
            else:
                raise ApiError(
                    f"source must be one of file/atom/expression, got {source!r}"
                )
            s.curve_counter += 1
            label = body.get("label") or curve.label or f"curve{s.curve_counter}"
            if label in s.curves:
                raise ApiError(f"curve label {label!r} already in use")
            curve.label = label
            s.curves[label] = curve
            s.order.append(label)
            return {"label": label, "r": curve.r.tolist(), "f": curve.f.tolist()}

    def _curve_from_file(self, body: dict) -> SampledCurve:
        text = body.get("text")
        if not text:
            raise ApiError("file source needs the curve-file text in 'text'")
        try:
            table = fileio.parse_curve_text(text, name="<upload>")
        except (fileio.CurveFormatError, GridError) as exc:
            raise ApiError(str(exc)) from None
        column = body.get("column")
        try:
            if column is None:
                return table.curves()[0]
            return table.curve(str(column))
        except (KeyError, GridError) as exc:
            raise ApiError(str(exc)) from None

    def _curve_from_atom(self, body: dict) -> SampledCurve:
        label = body.get("scatterer")
        if label not in self.scatterers:
            raise ApiError(
                f"unknown scatterer {label!r}; available: {', '.join(self.scatterers)}"
            )
        try:
            spec = AtomImageSpec(
                label=str(label),
                resolution=float(body.get("resolution", 0.0)),
                b0=float(body.get("b0", 0.0)),
                r_max=float(body.get("r_max", 8.0)),
                step=float(body.get("step", 0.01)),
                s_points=int(body.get("s_points", 2001)),
            )
            return atom_image(self.scatterers[label], spec)
        except (ValueError, GridError) as exc:
            raise ApiError(str(exc)) from None

    def _curve_from_expression(self, body: dict) -> SampledCurve:
        text = body.get("text")
        if not text:
            raise ApiError("expression source needs 'text'")
        origin = body.get("origin_value")
        try:
            expr = parse(text)
            return sample(
                expr,
                r_max=float(body.get("r_max", 8.0)),
                step=float(body.get("step", 0.01)),
                origin_value=None if origin is None else float(origin),
            )
        except (ExpressionError, GridError, ValueError) as exc:
            raise ApiError(str(exc)) from None

    # -- step b: decomposition -----------------------------------------------

    def decompose_curve(self, sid: str, label: str, body: dict) -> dict:
        s = self._session(sid)
        with s.lock:
            curve = self._curve(s, label)
            try:
                config = _config_from_json(body or {})
            except ValueError as exc:
                raise ApiError(str(exc)) from None
            dec = decompose(curve, config)
            summary = {
                "label": label,
                "terms": [[t.R, t.B, t.C] for t in dec.terms],
                "initial_terms": [[t.R, t.B, t.C] for t in dec.initial_terms],
                "residual_max_full": dec.residual_max_full,
                "residual_max_range": dec.residual_max_range,
                "iterations": dec.iterations_used,
                "converged": dec.converged,
            }
            s.decompositions[label] = summary
            s.edited[label] = [EditedTerm(t.R, t.B, t.C) for t in dec.terms]
            s.eps_term[label] = config.eps_term
            return summary

    def _curve(self, s: Session, label: str) -> SampledCurve:
        try:
            return s.curves[label]
        except KeyError:
            raise ApiError(f"unknown curve {label!r}", status=404) from None

    # -- step c: what-if edits -----------------------------------------------

    def edit_terms(self, sid: str, label: str, body: dict) -> dict:
        s = self._session(sid)
        with s.lock:
            curve = self._curve(s, label)
            terms = s.edited.setdefault(label, [])
            rejected = []
            for i, edit in enumerate(body.get("edits", [])):
                try:
                    self._apply_edit(terms, edit)
                except (ApiError, ValueError, TypeError, KeyError, IndexError) as exc:
                    rejected.append({"edit": i, "reason": str(exc)})
            model, residual = self._recompute(s, label)
            return {
                "label": label,
                "r": curve.r.tolist(),
                "model": model.tolist(),
                "residual": residual.tolist(),
                "terms": [t.to_json() for t in terms],
                "rejected": rejected,
            }

    @staticmethod
    def _apply_edit(terms: list[EditedTerm], edit: dict) -> None:
        op = edit.get("op")
        if op == "add":
            term = EditedTerm(float(edit["R"]), float(edit["B"]), float(edit["C"]))
            term.as_shell_term()  # validates
            terms.append(term)
            return
        index = edit.get("index")
        if not isinstance(index, int) or not (0 <= index < len(terms)):
            raise ApiError(f"term index {index!r} out of range 0..{len(terms) - 1}")
        if op == "disable":
            terms[index].enabled = False
        elif op == "enable":
            terms[index].enabled = True
        elif op == "modify":
            updated = EditedTerm(
                float(edit.get("R", terms[index].R)),
                float(edit.get("B", terms[index].B)),
                float(edit.get("C", terms[index].C)),
                enabled=terms[index].enabled,
            )
            updated.as_shell_term()  # validates
            terms[index] = updated
        else:
            raise ApiError(f"edit op must be add/modify/disable/enable, got {op!r}")

    def _recompute(self, s: Session, label: str):
        curve = self._curve(s, label)
        active = [t.as_shell_term() for t in s.edited.get(label, []) if t.enabled]
        eps_term = s.eps_term.get(label, DecomposeConfig().eps_term)
        scale = abs(float(curve.f[0])) or float(np.max(np.abs(curve.f)) or 1.0)
        model = evaluate_sum(active, curve.r, eps_term, scale)
        return model, curve.f - model

    # -- step d: plotting and export -------------------------------------------

    def _series(self, s: Session, ident: str):
        kind, _, label = ident.partition(":")
        curve = self._curve(s, label)
        if kind == "curve":
            return curve.r, curve.f
        if kind in ("model", "residual"):
            model, residual = self._recompute(s, label)
            return curve.r, model if kind == "model" else residual
        raise ApiError(f"identifier {ident!r} must start with curve:/model:/residual:")

    def plot_data(self, sid: str, body: dict) -> dict:
        s = self._session(sid)
        with s.lock:
            series = []
            for sel in body.get("selections", []):
                ident = sel.get("id", "")
                r, f = self._series(s, ident)
                series.append(
                    {
                        "id": ident,
                        "label": sel.get("label", ident),
                        "style": sel.get("style", {}),
                        "r": r.tolist(),
                        "f": f.tolist(),
                    }
                )
            # remember the selection so a snapshot restores the plot step
            s.plot_selections = [
                {"id": sel.get("id", ""), "label": sel.get("label"), "style": sel.get("style", {})}
                for sel in body.get("selections", [])
            ]
            return {"series": series}

    def export(self, sid: str, body: dict) -> dict:
        s = self._session(sid)
        with s.lock:
            selections = body.get("selections", [])
            if not selections:
                raise ApiError("nothing selected for export")
            columns = []
            r0 = None
            for ident in selections:
                r, f = self._series(s, ident)
                if r0 is None:
                    r0 = r
                elif len(r) != len(r0) or not np.array_equal(r, r0):
                    raise ApiError("selected series live on different grids")
                columns.append((ident.replace(":", "_"), f))
            return {"content": fileio.format_curve_file(r0, columns)}


def _config_from_json(body: dict) -> DecomposeConfig:
    kwargs = {}
    for key in ("eps_dec", "eps_peak", "eps_term", "b_min", "c_min"):
        if key in body:
            kwargs[key] = float(body[key])
    if "max_peaks" in body:
        kwargs["max_peaks"] = int(body["max_peaks"])
    if "protocol" in body:
        kwargs["protocol"] = str(body["protocol"])
    if "eps_dec_scale" in body:
        kwargs["eps_dec_absolute"] = body["eps_dec_scale"] == "absolute"
    if "decompose_range" in body and body["decompose_range"] is not None:
        lo, hi = body["decompose_range"]
        kwargs["decompose_range"] = (float(lo), float(hi))
    return DecomposeConfig(**kwargs)


_ROUTES = [
    ("POST", re.compile(r"^/api/session$"), "create_session", False),
    ("POST", re.compile(r"^/api/session/import$"), "import_session", True),
    ("GET", re.compile(r"^/api/session/(?P<sid>[^/]+)/snapshot$"), "snapshot", False),
    ("GET", re.compile(r"^/api/table$"), "table", False),
    ("POST", re.compile(r"^/api/session/(?P<sid>[^/]+)/curve$"), "create_curve", True),
    (
        "POST",
        re.compile(r"^/api/session/(?P<sid>[^/]+)/curve/(?P<label>[^/]+)/decompose$"),
        "decompose_curve",
        True,
    ),
    (
        "POST",
        re.compile(r"^/api/session/(?P<sid>[^/]+)/curve/(?P<label>[^/]+)/edit$"),
        "edit_terms",
        True,
    ),
    ("POST", re.compile(r"^/api/session/(?P<sid>[^/]+)/plot$"), "plot_data", True),
    ("POST", re.compile(r"^/api/session/(?P<sid>[^/]+)/export$"), "export", True),
]

_STATIC_TYPES = {
    ".html": "text/html",
    ".css": "text/css",
    ".js": "text/javascript",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


def make_handler(api: SessionApi, frontend: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _send_json(self, payload: dict, status: int = 200) -> None:
            body = json.dumps(payload, sort_keys=True).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _dispatch(self, method: str) -> None:
            for verb, pattern, name, wants_body in _ROUTES:
                if verb != method:
                    continue
                m = pattern.match(self.path)
                if not m:
                    continue
                args = list(m.groupdict().values())
                if wants_body:
                    length = int(self.headers.get("Content-Length", 0))
                    raw = self.rfile.read(length) if length else b"{}"
                    try:
                        body = json.loads(raw or b"{}")
                    except json.JSONDecodeError as exc:
                        self._send_json({"error": f"bad JSON body: {exc}"}, 400)
                        return
                    args.append(body)
                try:
                    result = getattr(api, name)(*args)
                except ApiError as exc:
                    self._send_json({"error": str(exc)}, exc.status)
                    return
                self._send_json(result)
                return
            if method == "GET" and self._serve_static():
                return
            self._send_json({"error": f"no route for {method} {self.path}"}, 404)

        def _serve_static(self) -> bool:
            if frontend is None:
                return False
            rel = self.path.lstrip("/") or "index.html"
            target = (frontend / rel).resolve()
            if not str(target).startswith(str(frontend.resolve())) or not target.is_file():
                return False
            data = target.read_bytes()
            self.send_response(200)
            ctype = _STATIC_TYPES.get(target.suffix, "application/octet-stream")
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
            return True

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

    return Handler


def make_server(host: str, port: int, table_path, frontend=None) -> ThreadingHTTPServer:
    api = SessionApi(table_path)
    handler = make_handler(api, Path(frontend) if frontend else None)
    return ThreadingHTTPServer((host, port), handler)


def run_server(host: str, port: int, table_path, frontend=None) -> None:
    server = make_server(host, port, table_path, frontend)
    print(f"session API listening on http://{host}:{server.server_address[1]}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
