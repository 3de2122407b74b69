import os
import tempfile

# keep test runs out of the user's log directory; read when run_log is imported
os.environ.setdefault("OMEGASIEVE_LOG_DIR", tempfile.mkdtemp(prefix="omegasieve-test-log-"))
