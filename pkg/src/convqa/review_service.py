"""Human review of generated QA sets: assignment, verdict log, clean export.

Persistence is an append-only JSONL verdict log; the in-memory index is
rebuilt by replaying the log on startup, so state is fully determined by the
log. A QA pair survives the clean export when enough distinct reviewers have
judged it and a quorum of them voted keep.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import MalformedVerdict, NoWorkRemaining, UnknownTarget
from .qa_gen import ConsistentSet

KEEP = "keep"
REMOVE = "remove"


@dataclass(frozen=True)
class ReviewVerdict:
    set_id: str
    qa_index: int
    reviewer_id: str
    decision: str  # keep | remove
    reason: str = ""
    timestamp: float = 0.0

    def __post_init__(self):
        if self.decision not in (KEEP, REMOVE):
            raise MalformedVerdict(f"decision must be keep or remove, got {self.decision!r}")
        if not self.reviewer_id:
            raise MalformedVerdict("reviewer_id must be nonempty")

    def to_json_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "qa_index": self.qa_index,
            "reviewer_id": self.reviewer_id,
            "decision": self.decision,
            "reason": self.reason,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json_dict(cls, record: dict) -> "ReviewVerdict":
        try:
            return cls(
                set_id=str(record["set_id"]),
                qa_index=int(record["qa_index"]),
                reviewer_id=str(record["reviewer_id"]),
                decision=str(record["decision"]),
                reason=str(record.get("reason", "") or ""),
                timestamp=float(record.get("timestamp", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedVerdict(f"bad verdict record: {exc}") from exc


@dataclass(frozen=True)
class CleanExportPolicy:
    reviewers_required: int = 3
    keep_quorum: int = 2

    def __post_init__(self):
        if not 1 <= self.keep_quorum <= self.reviewers_required:
            raise MalformedVerdict(
                f"need 1 <= keep_quorum <= reviewers_required, got {self.keep_quorum}/{self.reviewers_required}"
            )


class ReviewStore:
    """Dataset plus verdict index; appends are serialized through one lock."""

    def __init__(
        self,
        sets: Iterable[ConsistentSet],
        log_path: Path | str | None = None,
        reviewers_required: int = 3,
    ):
        self.sets = sorted(sets, key=lambda s: s.set_id)
        self.by_id = {s.set_id: s for s in self.sets}
        self.reviewers_required = reviewers_required
        self.log_path = Path(log_path) if log_path is not None else None
        # (set_id, qa_index, reviewer_id) -> ReviewVerdict; later entries supersede.
        self._index: dict[tuple[str, int, str], ReviewVerdict] = {}
        self._lock = threading.Lock()
        if self.log_path is not None and self.log_path.exists():
            for line in self.log_path.read_text("utf-8").splitlines():
                if line.strip():
                    self._apply(ReviewVerdict.from_json_dict(json.loads(line)))

    def _apply(self, verdict: ReviewVerdict) -> None:
        self._index[(verdict.set_id, verdict.qa_index, verdict.reviewer_id)] = verdict

    def _reviewers_of_set(self, set_id: str) -> set[str]:
        return {key[2] for key in self._index if key[0] == set_id}

    def _verdicts_by_reviewer_on_set(self, set_id: str, reviewer_id: str) -> int:
        return sum(1 for key in self._index if key[0] == set_id and key[2] == reviewer_id)

    def assign_batch(self, reviewer_id: str, n: int) -> list[ConsistentSet]:
        """Up to n sets this reviewer still has work on, least-judged first."""
        if n < 1:
            raise MalformedVerdict(f"batch size must be positive, got {n}")
        candidates = []
        for cset in self.sets:
            done = self._verdicts_by_reviewer_on_set(cset.set_id, reviewer_id)
            if done >= len(cset.qas):
                continue
            others = self._reviewers_of_set(cset.set_id) - {reviewer_id}
            if done == 0 and len(others) >= self.reviewers_required:
                continue
            candidates.append((done, cset.set_id, cset))
        if not candidates:
            raise NoWorkRemaining(f"reviewer {reviewer_id} has no assignable sets")
        candidates.sort(key=lambda item: (item[0], item[1]))
        return [cset for _, _, cset in candidates[:n]]

    def submit_verdict(self, verdict: ReviewVerdict) -> ReviewVerdict:
        cset = self.by_id.get(verdict.set_id)
        if cset is None:
            raise UnknownTarget(f"unknown set {verdict.set_id}")
        if not 0 <= verdict.qa_index < len(cset.qas):
            raise UnknownTarget(f"qa_index {verdict.qa_index} out of range for set {verdict.set_id}")
        if verdict.timestamp == 0.0:
            verdict = ReviewVerdict(
                verdict.set_id,
                verdict.qa_index,
                verdict.reviewer_id,
                verdict.decision,
                verdict.reason,
                time.time(),
            )
        with self._lock:
            if self.log_path is not None:
                with self.log_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(verdict.to_json_dict(), sort_keys=True) + "\n")
            self._apply(verdict)
        return verdict

    def progress(self) -> dict:
        fully = 0
        for cset in self.sets:
            if all(
                len({k[2] for k in self._index if k[0] == cset.set_id and k[1] == idx})
                >= self.reviewers_required
                for idx in range(len(cset.qas))
            ):
                fully += 1
        return {"total": len(self.sets), "fully_reviewed": fully, "pending": len(self.sets) - fully}

    def export_clean(self, policy: CleanExportPolicy | None = None) -> list[ConsistentSet]:
        """Sets whose QAs passed review, with under-kept QAs removed.

        A QA survives iff it has verdicts from at least reviewers_required
        distinct reviewers and at least keep_quorum of them said keep. Sets
        left with fewer than two QAs are dropped entirely.
        """
        policy = policy or CleanExportPolicy(reviewers_required=self.reviewers_required)
        out = []
        for cset in self.sets:
            survivors = []
            for idx, qa in enumerate(cset.qas):
                verdicts = [v for (sid, qi, _), v in self._index.items() if sid == cset.set_id and qi == idx]
                if len(verdicts) < policy.reviewers_required:
                    continue
                keeps = sum(1 for v in verdicts if v.decision == KEEP)
                if keeps >= policy.keep_quorum:
                    survivors.append(qa)
            if len(survivors) >= 2:
                out.append(ConsistentSet(cset.set_id, cset.image_id, cset.fact, tuple(survivors)))
        return out


def create_app(store: ReviewStore, images_dir: Path | str | None = None, ui_dir: Path | str | None = None):
    """FastAPI app exposing the review HTTP API around a ReviewStore."""
    from fastapi import FastAPI, HTTPException, Query
    from fastapi.responses import HTMLResponse, PlainTextResponse
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="convqa review service")

    def set_view(cset: ConsistentSet) -> dict:
        view = cset.to_json_dict()
        view["image_url"] = f"/images/{cset.image_id}.jpg"
        return view

    @app.get("/api/sets")
    def get_sets(reviewer: str = Query(...), n: int = Query(5, ge=1)):
        try:
            batch = store.assign_batch(reviewer, n)
        except NoWorkRemaining:
            return {"sets": [], "done": True}
        return {"sets": [set_view(s) for s in batch], "done": False}

    @app.post("/api/verdicts")
    def post_verdict(body: dict):
        try:
            verdict = store.submit_verdict(ReviewVerdict.from_json_dict(body))
        except MalformedVerdict as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except UnknownTarget as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"ok": True, "verdict": verdict.to_json_dict()}

    @app.get("/api/progress")
    def get_progress():
        return store.progress()

    @app.get("/api/export/clean")
    def get_export():
        lines = [json.dumps(s.to_json_dict(), sort_keys=True) for s in store.export_clean()]
        return PlainTextResponse("\n".join(lines) + ("\n" if lines else ""), media_type="application/jsonl")

    if images_dir is not None and Path(images_dir).is_dir():
        app.mount("/images", StaticFiles(directory=str(images_dir)), name="images")

    ui_index = Path(ui_dir) / "index.html" if ui_dir is not None else None
    if ui_index is not None and ui_index.is_file():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def root():
            return "<html><body><h1>convqa review service</h1><p>UI bundle not installed.</p></body></html>"

    return app
