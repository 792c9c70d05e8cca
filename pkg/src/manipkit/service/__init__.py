"""HTTP curation service: review state, annotation jobs, and the API app."""
