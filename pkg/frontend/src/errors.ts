/**
 * Service error classification: which failures deserve a retry banner
 * (backend briefly unreachable) versus inline validation feedback.
 */

interface ErrorBody {
  code?: string;
  message?: string;
  detail?: unknown;
}

export class ServiceError extends Error {
  constructor(
    readonly status: number | null,
    readonly code: string,
    message: string,
    readonly detail: unknown = undefined,
  ) {
    super(message);
    this.name = "ServiceError";
  }

  /** Connection refused, timeout, DNS: no HTTP status at all. */
  static network(cause: unknown): ServiceError {
    const message = cause instanceof Error ? cause.message : String(cause);
    return new ServiceError(null, "network_error", message);
  }

  static fromResponse(status: number, body: unknown): ServiceError {
    const parsed = (body ?? {}) as ErrorBody;
    return new ServiceError(
      status,
      parsed.code ?? `http_${status}`,
      parsed.message ?? `service returned ${status}`,
      parsed.detail,
    );
  }

  /** True when retrying later may succeed: network failure or 5xx/502-class. */
  get retryable(): boolean {
    if (this.status === null) return true;
    return this.status >= 500 || this.status === 429;
  }
}
