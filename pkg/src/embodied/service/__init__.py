"""HTTP service: FastAPI app and pydantic schemas."""
