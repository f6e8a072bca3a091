"""HTTP completion service over a trained checkpoint and optional apriori lexicon."""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .annotator import annotate
from .apriori import Granularity, StyleRuleLexicon, project, recommend
from .corpus import UNK_ID
from .decoding import DecodingError, complete_itemset
from .model import ModelParams, load_checkpoint
from .taxonomy import Taxonomy, fixture_taxonomy, load_taxonomy


class CompletionRequest(BaseModel):
    items: list[str] = Field(min_length=1)
    k: int = Field(default=5, ge=1, le=20)
    method: Literal["model", "apriori"] = "model"


class CandidateOut(BaseModel):
    item: str
    apparel: Optional[str] = None
    color: Optional[str] = None
    pattern: Optional[str] = None
    score: float
    raw: bool = False
    attention: Optional[list[float]] = None


class CompletionResponse(BaseModel):
    candidates: list[CandidateOut]
    warnings: list[str] = []


class ServiceState:
    def __init__(self):
        self.params: Optional[ModelParams] = None
        self.taxonomy: Optional[Taxonomy] = None
        self.lexicon: Optional[StyleRuleLexicon] = None


def build_app(model_path: Optional[str] = None,
              taxonomy_path: Optional[str] = None,
              lexicon_path: Optional[str] = None,
              preloaded: Optional[ServiceState] = None) -> FastAPI:
    app = FastAPI(title="outfitcomplete", version=__version__)
    state = preloaded or ServiceState()
    app.state.service = state

    if preloaded is None and model_path is not None:
        state.params = load_checkpoint(model_path)
        state.taxonomy = (load_taxonomy(taxonomy_path) if taxonomy_path
                          else fixture_taxonomy())
        if lexicon_path:
            state.lexicon = StyleRuleLexicon.load(lexicon_path)

    def require_loaded():
        if state.params is None or state.taxonomy is None:
            raise HTTPException(status_code=503, detail="model not loaded yet")

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/taxonomy")
    def taxonomy_terms():
        require_loaded()
        return state.taxonomy.to_dict()

    @app.post("/complete", response_model=CompletionResponse)
    def complete(request: CompletionRequest):
        require_loaded()
        items = []
        for chunk in request.items:
            items.extend(annotate(chunk, state.taxonomy))
        if not items:
            raise HTTPException(
                status_code=422,
                detail="no fashion terms recognized in the submitted items")
        warnings = []
        if request.method == "apriori":
            if state.lexicon is None:
                raise HTTPException(status_code=409,
                                    detail="no lexicon loaded for apriori")
            query = [project(i, Granularity.FULL) for i in items]
            ranked = recommend(state.lexicon, query, k=request.k)
            total = sum(s for _, s in ranked) or 1
            return CompletionResponse(candidates=[
                CandidateOut(item=name, score=support / total)
                for name, support in ranked], warnings=warnings)

        unknown = sorted({w for i in items for w in i.words()
                          if state.params.source_vocab.encode(w) == UNK_ID})
        if unknown:
            warnings.append(
                "unknown to the model vocabulary (treated as <unk>): "
                + ", ".join(unknown))
        try:
            candidates = complete_itemset(items, state.params,
                                          state.taxonomy, k=request.k)
        except DecodingError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        out = []
        for cand in candidates:
            out.append(CandidateOut(
                item=cand.item.render() if cand.item else " ".join(cand.tokens),
                apparel=cand.item.apparel if cand.item else None,
                color=cand.item.color if cand.item else None,
                pattern=cand.item.pattern if cand.item else None,
                score=cand.score, raw=cand.raw, attention=cand.attention))
        return CompletionResponse(candidates=out, warnings=warnings)

    return app
