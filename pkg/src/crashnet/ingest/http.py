"""HTTP plumbing shared by the exchange clients: token-bucket rate limiting and retried GETs."""
from __future__ import annotations

import logging
import os
import threading
import time

import requests

from ..errors import NetworkError

log = logging.getLogger(__name__)

PROXY_ENV = "CRASHNET_HTTP_PROXY"


class RateLimiter:
    """Thread-safe token bucket; ``acquire`` blocks until a token is available."""

    def __init__(self, rate: float, burst: int = 1, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate)
        self.burst = max(1, int(burst))
        self._tokens = float(self.burst)
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self._clock()
                self._tokens = min(self.burst, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                self._sleep((1.0 - self._tokens) / self.rate)


class HttpError(Exception):
    """Non-retryable HTTP status with the decoded body, if any."""

    def __init__(self, status: int, body):
        self.status = status
        self.body = body
        super().__init__(f"HTTP {status}: {body}")


class Transport:
    """GET a JSON document with bounded exponential backoff on retryable failures."""

    RETRYABLE = {418, 429, 500, 502, 503, 504}

    def __init__(self, limiter: RateLimiter, retries: int = 5, backoff: float = 1.0,
                 timeout: float = 30.0, session=None, sleep=time.sleep):
        self.limiter = limiter
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()
        self._sleep = sleep
        proxy = os.environ.get(PROXY_ENV)
        self.proxies = {"http": proxy, "https": proxy} if proxy else None

    def get(self, url: str, params: dict):
        last = None
        for attempt in range(self.retries):
            self.limiter.acquire()
            try:
                resp = self.session.get(url, params=params, timeout=self.timeout, proxies=self.proxies)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last = exc
            else:
                if resp.status_code == 200:
                    return resp.json()
                if resp.status_code not in self.RETRYABLE:
                    try:
                        body = resp.json()
                    except ValueError:
                        body = resp.text
                    raise HttpError(resp.status_code, body)
                last = HttpError(resp.status_code, resp.text)
            delay = self.backoff * 2 ** attempt
            log.warning("GET %s failed (%s); retrying in %.1fs", url, last, delay)
            self._sleep(delay)
        raise NetworkError(f"GET {url} failed after {self.retries} attempts: {last}")
