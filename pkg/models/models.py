from sqlalchemy import Column, Integer, String, DateTime, Boolean, Text, Enum
from sqlalchemy.sql import func
from .database import Base
import enum

class JobStatus(enum.Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"

class FuzzJob(Base):
    __tablename__ = "fuzz_jobs"

    id = Column(Integer, primary_key=True, index=True)
    job_id = Column(String, unique=True, index=True)

    # Run parameters
    mode = Column(String, default="expr")  # expr | actions
    seed = Column(Integer, default=0)
    cases = Column(Integer, default=100)
    max_depth = Column(Integer, default=5)
    force_general = Column(Boolean, default=False)
    mutation = Column(String, nullable=True)

    # Status and results
    status = Column(Enum(JobStatus), default=JobStatus.PENDING)
    cases_run = Column(Integer, default=0)
    failure_count = Column(Integer, default=0)
    report = Column(Text, nullable=True)  # line-delimited JSON, one line per failing case plus a summary
    error_message = Column(Text, nullable=True)

    # Timestamps
    created_at = Column(DateTime(timezone=True), server_default=func.now())
    started_at = Column(DateTime(timezone=True), nullable=True)
    completed_at = Column(DateTime(timezone=True), nullable=True)
    updated_at = Column(DateTime(timezone=True), onupdate=func.now())

    @property
    def verdict(self):
        if self.status != JobStatus.COMPLETED:
            return None
        return "fail" if self.failure_count else "pass"
