/** Typed client for the session service; the UI's only network surface. */

import { EventDoc, EventResponse, EventType, ScreenDoc, SessionCreated } from './types'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly screen?: ScreenDoc,
  ) {
    super(message)
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'UNKNOWN'
  let message = response.statusText
  let screen: ScreenDoc | undefined
  try {
    const body = await response.json()
    code = body.error ?? code
    message = body.message ?? message
    screen = body.screen ?? undefined
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(response.status, code, message, screen)
}

export class SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { 'content-type': 'application/json' },
      ...init,
    })
    if (!response.ok) throw await parseError(response)
    return (await response.json()) as T
  }

  createSession(age: number, education: string, seed?: number): Promise<SessionCreated> {
    return this.request<SessionCreated>('/sessions', {
      method: 'POST',
      body: JSON.stringify(seed === undefined ? { age, education } : { age, education, seed }),
    })
  }

  getScreen(sessionId: string): Promise<ScreenDoc> {
    return this.request<ScreenDoc>(`/sessions/${sessionId}/screen`)
  }

  postEvent(sessionId: string, type: EventType, fields: Partial<EventDoc> = {}): Promise<EventResponse> {
    const event: EventDoc = {
      schema_version: 1,
      type,
      ts: Date.now() / 1000,
      ...fields,
    }
    return this.request<EventResponse>(`/sessions/${sessionId}/events`, {
      method: 'POST',
      body: JSON.stringify(event),
    })
  }

  getSubjectReport(sessionId: string): Promise<Record<string, unknown>> {
    return this.request<Record<string, unknown>>(`/sessions/${sessionId}/report?audience=subject`)
  }
}

/** Build the outgoing event document (exposed for contract tests). */
export function buildEvent(type: EventType, fields: Partial<EventDoc> = {}, ts?: number): EventDoc {
  return { schema_version: 1, type, ts: ts ?? Date.now() / 1000, ...fields }
}
