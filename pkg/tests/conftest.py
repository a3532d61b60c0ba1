import threading
import time

import pytest
import uvicorn

from wellbot.content import default_library
from wellbot.emotions import default_wheel
from wellbot.engine import UserProfile, new_session
from wellbot.flows import default_flows
from wellbot.instruments import default_questionnaires


class LiveServer:
    """A real uvicorn server on an ephemeral port, for streaming tests."""

    def __init__(self, app):
        config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning", lifespan="off")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self):
        self.thread.start()
        deadline = time.monotonic() + 10.0
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{port}"
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=5)


@pytest.fixture(scope="session")
def flow_set():
    return default_flows()


@pytest.fixture(scope="session")
def library():
    return default_library()


@pytest.fixture(scope="session")
def wheel():
    return default_wheel()


@pytest.fixture(scope="session")
def questionnaires():
    return default_questionnaires()


@pytest.fixture
def profile():
    return UserProfile(user_id="u1", name="Maria", gender="female")


@pytest.fixture
def session(flow_set, profile):
    return new_session("s1", profile, flow_set)
