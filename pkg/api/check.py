from fastapi import APIRouter, Depends, HTTPException, BackgroundTasks
from sqlalchemy.orm import Session
from typing import List, Optional
from datetime import datetime, timezone
from pydantic import BaseModel, Field, model_validator
import uuid
import logging
import os

from models.database import get_db
from models.errors import EbSqlError
from models.models import FuzzJob, JobStatus
from services.checker import ACTIONS_MODE, EXPR_MODE, check_case, run_fuzz, shrink
from services.eb_parser import parse_actions, parse_expr
from services.generator import GenConfig
from services.state_file import read_state
from services.translator import Mutation, TranslatorOptions, options_for
from services.typecheck import typecheck
from api.translate import http_error

router = APIRouter(prefix="/api", tags=["checking"])
logger = logging.getLogger(__name__)


# Request/Response Models
class CheckRequest(BaseModel):
    """Differential check of one term or action set against one state"""
    state: str = Field(..., example="set s : int = {1}\nset t : int = {2}", description="State-file text")
    expr: Optional[str] = Field(None, example="s \\/ t")
    actions: Optional[str] = Field(None, example="s := t || t := s")
    force_general: bool = False

    @model_validator(mode="after")
    def one_input(self):
        if (self.expr is None) == (self.actions is None):
            raise ValueError("provide exactly one of 'expr' or 'actions'")
        return self


class CheckResponse(BaseModel):
    verdict: str
    counterexample: Optional[dict] = None


class FuzzJobRequest(BaseModel):
    """Request model for creating a new fuzz job"""
    mode: str = Field(EXPR_MODE, example="actions", description="expr (single terms) or actions")
    seed: int = Field(default_factory=lambda: int(os.getenv("EBSQL_SEED", "42")))
    cases: int = Field(
        default_factory=lambda: int(os.getenv("EBSQL_CASES", "100")),
        ge=0,
        le=100000,
        description="Number of generated cases"
    )
    max_depth: int = Field(default_factory=lambda: int(os.getenv("EBSQL_MAX_DEPTH", "5")), ge=0, le=12)
    force_general: bool = False
    mutation: Optional[Mutation] = Field(None, description="Run against a deliberately broken rule")

    @model_validator(mode="after")
    def known_mode(self):
        if self.mode not in (EXPR_MODE, ACTIONS_MODE):
            raise ValueError(f"mode must be '{EXPR_MODE}' or '{ACTIONS_MODE}'")
        return self


class FuzzJobResponse(BaseModel):
    """Response model for fuzz job information"""
    job_id: str
    status: JobStatus
    mode: str
    seed: int
    cases: int
    cases_run: int
    failure_count: int
    verdict: Optional[str]
    error_message: Optional[str]
    created_at: Optional[datetime]
    started_at: Optional[datetime]
    completed_at: Optional[datetime]

    class Config:
        from_attributes = True


class FuzzJobReportResponse(FuzzJobResponse):
    report: List[str] = []


@router.post("/check", response_model=CheckResponse)
def check(request: CheckRequest):
    """
    Compare the Event-B result with the translated SQL result; a failing case comes back shrunk
    """
    options = TranslatorOptions(force_general=request.force_general)
    try:
        db, env = read_state(request.state)
        program = parse_expr(request.expr) if request.expr is not None else parse_actions(request.actions)
        typecheck(program, env)
    except EbSqlError as e:
        raise http_error(e)

    failure = check_case(program, db, env, options)
    if failure is None:
        return CheckResponse(verdict="pass")
    logger.warning(f"check found a counterexample for {program}")
    return CheckResponse(verdict="fail", counterexample=shrink(failure, options).to_record())


@router.post("/fuzz/jobs", response_model=FuzzJobResponse)
async def create_fuzz_job(
    job_request: FuzzJobRequest,
    background_tasks: BackgroundTasks,
    db: Session = Depends(get_db)
):
    """
    Create a fuzz job that runs in the background and stores its report
    """
    try:
        job = FuzzJob(
            job_id=str(uuid.uuid4()),
            mode=job_request.mode,
            seed=job_request.seed,
            cases=job_request.cases,
            max_depth=job_request.max_depth,
            force_general=job_request.force_general,
            mutation=job_request.mutation.value if job_request.mutation else None,
            status=JobStatus.PENDING,
        )
        db.add(job)
        db.commit()
        db.refresh(job)

        background_tasks.add_task(run_fuzz_job, job.id)

        logger.info(f"Created fuzz job {job.job_id}: {job.cases} {job.mode} cases from seed {job.seed}")
        return FuzzJobResponse.model_validate(job)

    except Exception as e:
        logger.error(f"Failed to create fuzz job: {e}")
        raise HTTPException(status_code=500, detail=f"Failed to create fuzz job: {str(e)}")


@router.get("/fuzz/jobs/{job_id}", response_model=FuzzJobReportResponse)
async def get_fuzz_job(job_id: str, db: Session = Depends(get_db)):
    """
    Status, counts and report lines of a fuzz job
    """
    job = db.query(FuzzJob).filter(FuzzJob.job_id == job_id).first()

    if not job:
        raise HTTPException(status_code=404, detail="Fuzz job not found")

    response = FuzzJobReportResponse.model_validate(job)
    response.report = job.report.splitlines() if job.report else []
    return response


# Background fuzz function

def run_fuzz_job(job_id: int):
    """
    Background task: run the fuzz loop and persist the report
    """
    from models.database import SessionLocal

    db = SessionLocal()
    try:
        job = db.query(FuzzJob).filter(FuzzJob.id == job_id).first()
        if not job:
            logger.error(f"Fuzz job {job_id} not found")
            return

        job.status = JobStatus.RUNNING
        job.started_at = datetime.now(timezone.utc)
        db.commit()

        cfg = GenConfig(seed=job.seed, max_depth=job.max_depth)
        options = options_for(job.force_general, job.mutation)
        report = run_fuzz(cfg, job.cases, job.mode, options, workers=int(os.getenv("EBSQL_WORKERS", "1")))

        job.cases_run = report.cases_run
        job.failure_count = len(report.failures)
        job.report = "\n".join(report.to_lines())
        job.status = JobStatus.COMPLETED
        job.completed_at = datetime.now(timezone.utc)
        db.commit()

        logger.info(f"Completed fuzz job {job.job_id}: {report.cases_run} cases, {job.failure_count} failures")

    except Exception as e:
        logger.error(f"Fuzz job {job_id} failed: {e}")

        job = db.query(FuzzJob).filter(FuzzJob.id == job_id).first()
        if job:
            job.status = JobStatus.FAILED
            job.error_message = str(e)
            job.completed_at = datetime.now(timezone.utc)
            db.commit()

    finally:
        db.close()
