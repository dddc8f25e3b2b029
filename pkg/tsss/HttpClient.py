#
#	HttpClient.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Sending JSON requests to OpenAI-compatible backends (completions, chat,
#	embeddings, tokenize). Shared by the embedding, generation and tokenizer
#	clients.
#

import os, time
from typing import Any, Dict, Optional
import requests
from tsss.Constants import Constants as C
from tsss.Logging import Logging
from tsss.Types import TSSSError


backoffBase:float = 0.5		# seconds, doubled with every retry


def apiKey(apiKeyEnv: Optional[str]) -> Optional[str]:
	""" Read an API key from the environment variable named in the configuration. """
	if apiKeyEnv is None or len(apiKeyEnv) == 0:
		return None
	return os.environ.get(apiKeyEnv)


def sendRequest(url: str, body: Dict[str, Any], apiKeyEnv: Optional[str] = None, timeout: float = 30.0, retries: int = 3) -> Dict[str, Any]:
	""" POST a JSON body and return the decoded JSON response.

		Connection errors, timeouts and 5xx responses are retried with exponential
		backoff, 4xx responses fail immediately.
	"""
	headers = { 'Content-Type' : 'application/json' }
	if (key := apiKey(apiKeyEnv)) is not None:
		headers['Authorization'] = 'Bearer %s' % key

	lastError:TSSSError = TSSSError(C.rcBackendUnreachable, 'target not reachable: %s' % url)
	for attempt in range(0, retries + 1):
		if attempt > 0:
			delay = backoffBase * (2 ** (attempt - 1))
			Logging.logDebug('Retrying request in %.1f s (attempt %d/%d): %s' % (delay, attempt, retries, url))
			time.sleep(delay)
		try:
			Logging.logDebug('<== Request: POST %s' % url)
			r = requests.post(url, json=body, headers=headers, timeout=timeout)
			Logging.logDebug('==> Response (%d) from %s' % (r.status_code, url))
		except requests.exceptions.Timeout:
			Logging.logWarn('Request timed out: %s' % url)
			lastError = TSSSError(C.rcTimeout, 'request timed out after %.1f s: %s' % (timeout, url))
			continue
		except requests.exceptions.RequestException as e:
			Logging.logWarn('Failed to send request: %s' % str(e))
			lastError = TSSSError(C.rcBackendUnreachable, 'target not reachable: %s' % url)
			continue

		if r.status_code >= 500:
			lastError = TSSSError(C.rcBackendError, 'backend error %d: %s' % (r.status_code, url))
			continue
		if r.status_code >= 400:
			raise TSSSError(C.rcBackendError, 'backend rejected request (%d): %s' % (r.status_code, r.text[:200]))
		try:
			return r.json()
		except ValueError:
			raise TSSSError(C.rcBackendError, 'backend returned no JSON: %s' % url)

	raise lastError


def joinURL(base: str, path: str) -> str:
	return base.rstrip('/') + '/' + path.lstrip('/')
