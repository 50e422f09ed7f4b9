from .database import Base, get_db
from .models import FuzzJob, JobStatus

__all__ = [
    "Base",
    "get_db",
    "FuzzJob",
    "JobStatus",
]
