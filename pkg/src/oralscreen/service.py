"""Exam-session workflow and HTTP API.

A session collects a questionnaire, one or more guide-cropped images, and
freehand pain/bleeding strokes, then analyzes everything in one shot:
forward pass (enhanced model when the questionnaire is complete, baseline
otherwise), box decoding, heatmaps for flagged diffuse conditions, level
assignment from the operating-point table, and a persisted report.

Sessions live in a directory-per-session store and survive restarts. One
session's mutations never run concurrently: a second writer gets a conflict
instead of interleaving.
"""

# No postponed annotations here: the HTTP route models are defined inside
# create_app, and the framework must see them as real classes.

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from PIL import Image

from .config import (
    DEFAULT_QUESTIONNAIRE,
    QuestionnaireSchema,
    config_hash,
)
from .core import (
    ALL_CONDITIONS,
    DEFAULT_GUIDE,
    BoundingBox,
    ConfidenceLevel,
    Condition,
    FracRect,
    GuideGeometry,
    OperatingPointTable,
    OralImage,
    PriorProfile,
    TaskForm,
    crop_to_guide,
    image_score_from_boxes,
    level_for_score,
    rasterize_polyline,
)
from .errors import (
    ConfigError,
    ConflictError,
    MissingArtifactError,
)
from .explain import grad_cam, save_heatmap
from .model import ModelParams, decode_boxes, forward

SESSION_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1

STROKE_CHANNELS = ("pain", "bleeding")


# ---------------------------------------------------------------------------
# Guidance text
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuggestionEntry:
    description: str
    typical_appearance: str
    actions: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.actions:
            raise ConfigError("every condition needs at least one suggested action")


@dataclass(frozen=True)
class SuggestionCatalog:
    """Editorial background and next-step text per condition.

    The text is educational placeholder material, not clinical guidance.
    """

    entries: Mapping[Condition, SuggestionEntry]

    def __post_init__(self) -> None:
        for c in ALL_CONDITIONS:
            if c not in self.entries:
                raise ConfigError(f"suggestion catalog missing {c.value}")

    def entry(self, condition: Condition) -> SuggestionEntry:
        return self.entries[condition]


DEFAULT_CATALOG = SuggestionCatalog(
    {
        Condition.PERIODONTAL_DISEASE: SuggestionEntry(
            description=(
                "Inflammation of the gum and supporting tissue, often starting "
                "as gingivitis; untreated it can loosen teeth."
            ),
            typical_appearance=(
                "Red, swollen or receding gum lines, sometimes bleeding at the "
                "margins."
            ),
            actions=(
                "Brush gently twice a day along the gum line",
                "Clean between teeth daily with floss or interdental brushes",
                "Book a dental cleaning and periodontal check",
            ),
        ),
        Condition.CARIES: SuggestionEntry(
            description=(
                "Tooth decay: acid from plaque bacteria dissolves enamel and "
                "dentine, forming cavities."
            ),
            typical_appearance=(
                "Dark brown or black spots and pits on chewing surfaces or "
                "between teeth."
            ),
            actions=(
                "Cut down on sugary snacks and drinks between meals",
                "Use a fluoride toothpaste twice a day",
                "See a dentist soon; early fillings are small fillings",
            ),
        ),
        Condition.DENTAL_CALCULUS: SuggestionEntry(
            description=(
                "Hardened plaque (tartar) that builds up on teeth near the gum "
                "line and can irritate the gums."
            ),
            typical_appearance=(
                "Yellow to brown crusty deposits, most often behind the lower "
                "front teeth."
            ),
            actions=(
                "Schedule a professional scaling; brushing cannot remove tartar",
                "Brush with attention to the gum line to slow new buildup",
            ),
        ),
        Condition.SOFT_DEPOSIT: SuggestionEntry(
            description=(
                "Soft plaque and food debris sitting on the tooth surface; it "
                "hardens into tartar if not cleaned."
            ),
            typical_appearance=(
                "Pale yellowish film or specks along the teeth, easiest to see "
                "after disclosing."
            ),
            actions=(
                "Brush for two minutes twice a day with small circular strokes",
                "Eat more fibrous food and rinse after meals",
            ),
        ),
        Condition.DISCOLORATION: SuggestionEntry(
            description=(
                "Staining or darkening of tooth enamel from food, drink, "
                "smoking or aging."
            ),
            typical_appearance=(
                "Brownish or yellowish shading spread across one or more teeth."
            ),
            actions=(
                "Limit coffee, tea and smoking",
                "Ask a dentist about professional cleaning or whitening options",
            ),
        ),
    }
)


# ---------------------------------------------------------------------------
# Report structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionFinding:
    """One condition's outcome for one image."""

    condition: Condition
    score: float
    level: ConfidenceLevel
    boxes: tuple[BoundingBox, ...] = ()
    heatmap_ref: str | None = None
    description: str = ""
    typical_appearance: str = ""
    suggestions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        localized = self.condition.task_form is TaskForm.LOCALIZED
        if localized and self.heatmap_ref is not None:
            raise ValueError(f"{self.condition.value} must not carry a heatmap")
        if not localized and self.boxes:
            raise ValueError(f"{self.condition.value} must not carry boxes")
        if self.level >= ConfidenceLevel.LIKELY:
            if localized and not self.boxes:
                raise ValueError(
                    f"{self.condition.value} flagged {self.level.label} without boxes"
                )
            if not localized and self.heatmap_ref is None:
                raise ValueError(
                    f"{self.condition.value} flagged {self.level.label} without a heatmap"
                )
            if not self.suggestions:
                raise ValueError(
                    f"{self.condition.value} flagged {self.level.label} without suggestions"
                )

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "task_form": self.condition.task_form.value,
            "score": self.score,
            "level": self.level.label,
            "boxes": [b.to_dict() for b in self.boxes],
            "heatmap_ref": self.heatmap_ref,
            "description": self.description,
            "typical_appearance": self.typical_appearance,
            "suggestions": list(self.suggestions),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConditionFinding":
        return cls(
            condition=Condition(d["condition"]),
            score=float(d["score"]),
            level=ConfidenceLevel.from_label(d["level"]),
            boxes=tuple(BoundingBox.from_dict(b) for b in d["boxes"]),
            heatmap_ref=d.get("heatmap_ref"),
            description=d.get("description", ""),
            typical_appearance=d.get("typical_appearance", ""),
            suggestions=tuple(d.get("suggestions", ())),
        )


@dataclass(frozen=True)
class ImageResult:
    image_id: str
    image_ref: str
    findings: tuple[ConditionFinding, ...]

    def __post_init__(self) -> None:
        got = tuple(f.condition for f in self.findings)
        if got != ALL_CONDITIONS:
            raise ValueError("findings must cover all conditions in canonical order")

    def finding(self, condition: Condition) -> ConditionFinding:
        return self.findings[ALL_CONDITIONS.index(condition)]

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "image_ref": self.image_ref,
            "findings": [f.to_dict() for f in self.findings],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ImageResult":
        return cls(
            image_id=d["image_id"],
            image_ref=d.get("image_ref", ""),
            findings=tuple(ConditionFinding.from_dict(f) for f in d["findings"]),
        )


@dataclass(frozen=True)
class ExamReport:
    session_id: str
    model_flag: str
    generated_at: str
    config_hash: str
    images: tuple[ImageResult, ...]
    schema_version: int = REPORT_SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "session_id": self.session_id,
            "model_flag": self.model_flag,
            "generated_at": self.generated_at,
            "config_hash": self.config_hash,
            "images": [im.to_dict() for im in self.images],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExamReport":
        return cls(
            session_id=d["session_id"],
            model_flag=d["model_flag"],
            generated_at=d["generated_at"],
            config_hash=d["config_hash"],
            images=tuple(ImageResult.from_dict(im) for im in d["images"]),
            schema_version=int(d["schema_version"]),
        )


# ---------------------------------------------------------------------------
# Session state
# ---------------------------------------------------------------------------


@dataclass
class ImageRecord:
    image_id: str
    filename: str
    guide: dict | None

    def to_dict(self) -> dict:
        return {"image_id": self.image_id, "filename": self.filename, "guide": self.guide}


@dataclass
class ExamSession:
    session_id: str
    status: str = "collecting"
    created_at: str = ""
    updated_at: str = ""
    answers: dict = field(default_factory=dict)
    images: list[ImageRecord] = field(default_factory=list)

    def image(self, image_id: str) -> ImageRecord:
        for rec in self.images:
            if rec.image_id == image_id:
                return rec
        raise MissingArtifactError(
            f"session {self.session_id} has no image {image_id!r}"
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SESSION_SCHEMA_VERSION,
            "session_id": self.session_id,
            "status": self.status,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "answers": self.answers,
            "images": [rec.to_dict() for rec in self.images],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExamSession":
        return cls(
            session_id=d["session_id"],
            status=d["status"],
            created_at=d["created_at"],
            updated_at=d["updated_at"],
            answers=dict(d.get("answers", {})),
            images=[
                ImageRecord(r["image_id"], r["filename"], r.get("guide"))
                for r in d.get("images", [])
            ],
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _parse_strokes(raw: Sequence[Mapping]) -> list[dict]:
    strokes = []
    for k, item in enumerate(raw):
        channel = item.get("channel")
        if channel not in STROKE_CHANNELS:
            raise ValueError(
                f"stroke {k}: channel must be one of {STROKE_CHANNELS}, got {channel!r}"
            )
        points = item.get("points", [])
        if not points:
            raise ValueError(f"stroke {k}: needs at least one point")
        parsed = []
        for p in points:
            x, y = float(p[0]), float(p[1])
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"stroke {k}: point ({x}, {y}) outside [0,1]")
            parsed.append([x, y])
        stroke = {"channel": channel, "points": parsed}
        if "radius" in item and item["radius"] is not None:
            radius = float(item["radius"])
            if radius <= 0:
                raise ValueError(f"stroke {k}: radius must be positive")
            stroke["radius"] = radius
        strokes.append(stroke)
    return strokes


def _guide_from_dict(d: Mapping | None) -> GuideGeometry:
    if d is None:
        return DEFAULT_GUIDE
    try:
        return GuideGeometry(
            dashed_box=FracRect(*[float(v) for v in d["dashed"]]),
            solid_box=FracRect(*[float(v) for v in d["solid"]]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"guide must carry dashed and solid [x0,y0,x1,y1]: {exc}")


def _guide_to_dict(g: GuideGeometry) -> dict:
    return {"dashed": list(g.dashed_box.as_tuple()), "solid": list(g.solid_box.as_tuple())}


# ---------------------------------------------------------------------------
# The service
# ---------------------------------------------------------------------------


class ExamService:
    """Stateful session engine over a directory store.

    Heavy inputs (model params, operating points, questionnaire schema) are
    loaded once and never mutated; per-session state is re-read from disk on
    demand so a restarted service picks up where the old one stopped.
    """

    def __init__(
        self,
        store_dir: str | Path,
        baseline: ModelParams,
        table: OperatingPointTable,
        enhanced: ModelParams | None = None,
        schema: QuestionnaireSchema = DEFAULT_QUESTIONNAIRE,
        catalog: SuggestionCatalog = DEFAULT_CATALOG,
        nms_iou: float = 0.45,
        brush_radius: float = 1.5,
    ):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.baseline = baseline
        self.enhanced = enhanced
        if enhanced is not None:
            if enhanced.config.prior_width != schema.one_hot_width + 2:
                raise ConfigError(
                    f"enhanced params expect prior width {enhanced.config.prior_width}, "
                    f"questionnaire encodes {schema.one_hot_width + 2}"
                )
        self.table = table
        self.schema = schema
        self.catalog = catalog
        self.nms_iou = nms_iou
        self.brush_radius = brush_radius
        self.input_size = baseline.config.input_size
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self.run_hash = config_hash(
            {
                "table": json.loads(table.to_json()),
                "baseline": baseline.config.to_dict(),
                "enhanced": enhanced.config.to_dict() if enhanced else None,
                "questionnaire": schema.to_dict(),
                "nms_iou": nms_iou,
            }
        )

    # -- store paths --------------------------------------------------------

    def _dir(self, session_id: str) -> Path:
        return self.store_dir / session_id

    def _session_file(self, session_id: str) -> Path:
        return self._dir(session_id) / "session.json"

    def _image_file(self, session_id: str, image_id: str) -> Path:
        return self._dir(session_id) / "images" / f"{image_id}.png"

    def _strokes_file(self, session_id: str, image_id: str) -> Path:
        return self._dir(session_id) / "strokes" / f"{image_id}.json"

    def _report_file(self, session_id: str) -> Path:
        return self._dir(session_id) / "report.json"

    def artifact_dir(self, session_id: str) -> Path:
        return self._dir(session_id) / "artifacts"

    # -- locking ------------------------------------------------------------

    def _lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    class _Guard:
        def __init__(self, lock: threading.Lock, session_id: str):
            self.lock = lock
            self.session_id = session_id

        def __enter__(self):
            if not self.lock.acquire(blocking=False):
                raise ConflictError(
                    f"session {self.session_id} is being modified by another request"
                )
            return self

        def __exit__(self, *exc):
            self.lock.release()
            return False

    def _guard(self, session_id: str) -> "_Guard":
        return self._Guard(self._lock(session_id), session_id)

    # -- persistence --------------------------------------------------------

    def _save_session(self, session: ExamSession) -> None:
        session.updated_at = _now()
        path = self._session_file(session.session_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(session.to_dict(), fh, indent=1)

    def _load_session(self, session_id: str) -> ExamSession:
        path = self._session_file(session_id)
        if not path.exists():
            raise MissingArtifactError(f"no session {session_id!r}")
        with open(path, "r", encoding="utf-8") as fh:
            return ExamSession.from_dict(json.load(fh))

    def _require_collecting(self, session: ExamSession) -> None:
        if session.status != "collecting":
            raise ConflictError(
                f"session {session.session_id} is {session.status}; it no longer "
                "accepts input"
            )

    # -- workflow operations --------------------------------------------------

    def create_session(self) -> ExamSession:
        session_id = uuid.uuid4().hex[:12]
        session = ExamSession(
            session_id=session_id, created_at=_now(), updated_at=_now()
        )
        self._save_session(session)
        return session

    def get_session(self, session_id: str) -> ExamSession:
        return self._load_session(session_id)

    def submit_questionnaire(self, session_id: str, answers: Mapping[str, int]) -> ExamSession:
        with self._guard(session_id):
            session = self._load_session(session_id)
            self._require_collecting(session)
            validated = {}
            for qid, choice in answers.items():
                self.schema.validate_answer(qid, int(choice))
                validated[qid] = int(choice)
            session.answers = validated
            self._save_session(session)
            return session

    def upload_image(
        self,
        session_id: str,
        pixels: np.ndarray,
        guide: GuideGeometry | None = None,
    ) -> str:
        """Crop the frame to the guide's solid box and store it at model size."""
        with self._guard(session_id):
            session = self._load_session(session_id)
            self._require_collecting(session)
            image_id = f"img_{len(session.images):03d}"
            src = OralImage(
                pixels=np.asarray(pixels, dtype=np.float32), source_id=image_id
            )
            used_guide = guide or DEFAULT_GUIDE
            crop = crop_to_guide(src, used_guide, out_size=self.input_size)
            path = self._image_file(session_id, image_id)
            path.parent.mkdir(parents=True, exist_ok=True)
            Image.fromarray(
                np.round(np.clip(crop.pixels, 0.0, 1.0) * 255.0).astype(np.uint8),
                mode="RGB",
            ).save(path, format="PNG")
            session.images.append(
                ImageRecord(
                    image_id=image_id,
                    filename=f"images/{image_id}.png",
                    guide=_guide_to_dict(used_guide),
                )
            )
            self._save_session(session)
            return image_id

    def annotate(
        self, session_id: str, image_id: str, strokes: Sequence[Mapping]
    ) -> dict:
        """Append strokes; returns per-channel set-pixel counts of the mask."""
        parsed = _parse_strokes(strokes)
        with self._guard(session_id):
            session = self._load_session(session_id)
            self._require_collecting(session)
            session.image(image_id)  # existence check
            path = self._strokes_file(session_id, image_id)
            existing = self._load_strokes(session_id, image_id)
            existing.extend(parsed)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                json.dump({"schema_version": 1, "strokes": existing}, fh, indent=1)
            self._save_session(session)
            mask = self._mask_for(session_id, image_id)
            return {
                "image_id": image_id,
                "stroke_count": len(existing),
                "pain_pixels": int(mask[:, :, 0].sum()),
                "bleeding_pixels": int(mask[:, :, 1].sum()),
            }

    def _load_strokes(self, session_id: str, image_id: str) -> list[dict]:
        path = self._strokes_file(session_id, image_id)
        if not path.exists():
            return []
        with open(path, "r", encoding="utf-8") as fh:
            return list(json.load(fh).get("strokes", []))

    def _mask_for(self, session_id: str, image_id: str) -> np.ndarray:
        """Rasterize all recorded strokes to the 2-channel symptom mask."""
        size = self.input_size
        mask = np.zeros((size, size, 2), dtype=np.uint8)
        for stroke in self._load_strokes(session_id, image_id):
            channel = STROKE_CHANNELS.index(stroke["channel"])
            painted = rasterize_polyline(
                [(p[0], p[1]) for p in stroke["points"]],
                size,
                size,
                radius=float(stroke.get("radius", self.brush_radius)),
            )
            mask[:, :, channel] |= painted.astype(np.uint8)
        return mask

    def _load_image(self, session_id: str, record: ImageRecord) -> OralImage:
        path = self._dir(session_id) / record.filename
        if not path.exists():
            raise MissingArtifactError(f"stored image {record.filename} is missing")
        with Image.open(path) as im:
            pixels = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
        return OralImage(pixels=pixels, source_id=record.image_id)

    # -- analysis -------------------------------------------------------------

    def analyze(self, session_id: str) -> ExamReport:
        """Run the model over every image and persist the report.

        Idempotent: a second call returns the stored report unchanged.
        """
        with self._guard(session_id):
            session = self._load_session(session_id)
            report_path = self._report_file(session_id)
            if session.status == "analyzed" and report_path.exists():
                return self._read_report(session_id)
            if not session.images:
                raise ValueError(
                    f"session {session_id} has no images; upload at least one "
                    "before analyze"
                )
            report = self._build_report(session)
            with open(report_path, "w", encoding="utf-8") as fh:
                json.dump(report.to_dict(), fh, indent=1)
            session.status = "analyzed"
            self._save_session(session)
            return report

    def _profile_for(self, session: ExamSession, image_id: str) -> PriorProfile:
        ordered = self.schema.ordered_answers(session.answers)
        return PriorProfile(
            answers=ordered,
            symptom_mask=self._mask_for(session.session_id, image_id),
            choice_counts=self.schema.choice_counts,
        )

    def _build_report(self, session: ExamSession) -> ExamReport:
        complete = self.schema.is_complete(session.answers)
        use_enhanced = complete and self.enhanced is not None
        params = self.enhanced if use_enhanced else self.baseline
        artifact_dir = self.artifact_dir(session.session_id)
        results = []
        for record in session.images:
            image = self._load_image(session.session_id, record)
            profile = (
                self._profile_for(session, record.image_id) if use_enhanced else None
            )
            raw = forward(params, image, profile)
            decoded = decode_boxes(raw, conf_floor=0.0, nms_iou=self.nms_iou)
            findings = []
            for condition in ALL_CONDITIONS:
                entry = self.catalog.entry(condition)
                if condition.task_form is TaskForm.LOCALIZED:
                    mine = [b for b in decoded if b.condition is condition]
                    score = image_score_from_boxes(mine, condition)
                    level = level_for_score(score, condition, self.table)
                    _, t2 = self.table.pair(condition)
                    shown = tuple(b for b in mine if b.confidence >= t2)
                    findings.append(
                        ConditionFinding(
                            condition=condition,
                            score=score,
                            level=level,
                            boxes=shown if level >= ConfidenceLevel.LIKELY else (),
                            description=entry.description,
                            typical_appearance=entry.typical_appearance,
                            suggestions=entry.actions,
                        )
                    )
                else:
                    score = raw.condition_score(condition)
                    level = level_for_score(score, condition, self.table)
                    heatmap_ref = None
                    if level >= ConfidenceLevel.LIKELY:
                        heatmap = grad_cam(params, image, condition, profile)
                        fname = f"{record.image_id}_{condition.value}.png"
                        save_heatmap(heatmap, artifact_dir / fname)
                        heatmap_ref = (
                            f"/sessions/{session.session_id}/artifacts/{fname}"
                        )
                    findings.append(
                        ConditionFinding(
                            condition=condition,
                            score=score,
                            level=level,
                            heatmap_ref=heatmap_ref,
                            description=entry.description,
                            typical_appearance=entry.typical_appearance,
                            suggestions=entry.actions,
                        )
                    )
            results.append(
                ImageResult(
                    image_id=record.image_id,
                    image_ref=(
                        f"/sessions/{session.session_id}/images/{record.image_id}"
                    ),
                    findings=tuple(findings),
                )
            )
        return ExamReport(
            session_id=session.session_id,
            model_flag=params.flag,
            generated_at=_now(),
            config_hash=self.run_hash,
            images=tuple(results),
        )

    def _read_report(self, session_id: str) -> ExamReport:
        with open(self._report_file(session_id), "r", encoding="utf-8") as fh:
            return ExamReport.from_dict(json.load(fh))

    def get_report(self, session_id: str) -> ExamReport:
        session = self._load_session(session_id)
        if session.status != "analyzed":
            raise ConflictError(
                f"session {session_id} has not been analyzed yet"
            )
        return self._read_report(session_id)

    def report_bytes(self, session_id: str) -> bytes:
        """Raw persisted report, for byte-level comparisons."""
        session = self._load_session(session_id)
        if session.status != "analyzed":
            raise ConflictError(f"session {session_id} has not been analyzed yet")
        return self._report_file(session_id).read_bytes()


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------


def create_app(service: ExamService):
    """FastAPI application exposing the session workflow."""
    import io

    from fastapi import FastAPI, File, Form, Request, UploadFile
    from fastapi.responses import FileResponse, JSONResponse
    from pydantic import BaseModel

    class AnswersBody(BaseModel):
        answers: dict[str, int]

    class StrokeBody(BaseModel):
        channel: str
        points: list[list[float]]
        radius: float | None = None

    class AnnotationsBody(BaseModel):
        strokes: list[StrokeBody]

    app = FastAPI(title="oral self-exam service")

    @app.exception_handler(Exception)
    async def _handle(request: Request, exc: Exception):
        if isinstance(exc, MissingArtifactError):
            status = 404
        elif isinstance(exc, ConflictError):
            status = 409
        elif isinstance(exc, (ValueError, ConfigError)):
            status = 400
        else:
            status = 500
        category = getattr(exc, "category", "error")
        return JSONResponse(
            status_code=status, content={"error": category, "detail": str(exc)}
        )

    @app.get("/questionnaire")
    def questionnaire():
        return service.schema.to_dict()

    @app.post("/sessions", status_code=201)
    def create_session():
        session = service.create_session()
        return {"session_id": session.session_id, "status": session.status}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = service.get_session(session_id)
        return {
            "session_id": session.session_id,
            "status": session.status,
            "answers": session.answers,
            "questionnaire_complete": service.schema.is_complete(session.answers),
            "images": [rec.image_id for rec in session.images],
        }

    @app.put("/sessions/{session_id}/questionnaire")
    def put_questionnaire(session_id: str, body: AnswersBody):
        session = service.submit_questionnaire(session_id, body.answers)
        return {
            "session_id": session.session_id,
            "answers": session.answers,
            "questionnaire_complete": service.schema.is_complete(session.answers),
        }

    @app.post("/sessions/{session_id}/images", status_code=201)
    async def upload_image(
        session_id: str,
        file: UploadFile = File(...),
        guide: str | None = Form(None),
    ):
        blob = await file.read()
        try:
            with Image.open(io.BytesIO(blob)) as im:
                pixels = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
        except Exception as exc:
            raise ValueError(f"cannot decode uploaded image: {exc}")
        guide_geom = _guide_from_dict(json.loads(guide)) if guide else None
        image_id = service.upload_image(session_id, pixels, guide_geom)
        return {"session_id": session_id, "image_id": image_id}

    @app.get("/sessions/{session_id}/images/{image_id}")
    def get_image(session_id: str, image_id: str):
        session = service.get_session(session_id)
        record = session.image(image_id)
        return FileResponse(service._dir(session_id) / record.filename)

    @app.post("/sessions/{session_id}/images/{image_id}/annotations")
    def post_annotations(session_id: str, image_id: str, body: AnnotationsBody):
        return service.annotate(
            session_id, image_id, [s.model_dump() for s in body.strokes]
        )

    @app.post("/sessions/{session_id}/analyze")
    def analyze(session_id: str):
        return service.analyze(session_id).to_dict()

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        return service.get_report(session_id).to_dict()

    @app.get("/sessions/{session_id}/artifacts/{name}")
    def artifact(session_id: str, name: str):
        if "/" in name or ".." in name:
            raise ValueError("bad artifact name")
        path = service.artifact_dir(session_id) / name
        if not path.exists():
            raise MissingArtifactError(f"no artifact {name!r}")
        return FileResponse(path)

    return app
