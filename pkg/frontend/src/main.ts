/** Kiosk-style app shell: one session, one screen at a time.
 *
 * The page never navigates away during a session; the subject moves only
 * through engine screens. At most one event request is in flight; local
 * selection state is reconciled with the returned screen.
 */

import { ApiError, SessionApi } from './api'
import { SpeechPlayer } from './speech'
import { theme } from './theme'
import { EventDoc, EventResponse, EventType, ScreenDoc } from './types'
import { renderScreen } from './render'

interface AppConfig {
  baseUrl: string
  age: number
  education: string
  seed?: number
}

export class App {
  private readonly api: SessionApi
  private readonly host: HTMLElement
  private readonly speech: SpeechPlayer
  private sessionId: string | null = null
  private busy = false
  private orientationTimer: ReturnType<typeof setTimeout> | null = null

  constructor(host: HTMLElement, config: AppConfig, api?: SessionApi, speech?: SpeechPlayer) {
    this.host = host
    this.api = api ?? new SessionApi(config.baseUrl)
    this.speech = speech ?? new SpeechPlayer()
    this.config = config
  }

  private config: AppConfig

  async start(): Promise<void> {
    const created = await this.api.createSession(this.config.age, this.config.education, this.config.seed)
    this.sessionId = created.session_id
    this.show(created.screen)
  }

  private emit = (type: EventType, fields: Partial<EventDoc> = {}): void => {
    void this.post(type, fields)
  }

  private async post(type: EventType, fields: Partial<EventDoc>): Promise<void> {
    if (!this.sessionId || this.busy) return
    this.busy = true
    try {
      const response = await this.api.postEvent(this.sessionId, type, fields)
      this.busy = false
      this.handleResponse(response)
    } catch (error) {
      this.busy = false
      if (error instanceof ApiError && error.screen) {
        this.show(error.screen) // rejected event: re-sync with the engine
      } else {
        this.showUnavailable()
      }
    }
  }

  private handleResponse(response: EventResponse): void {
    if (response.status === 'in_progress') {
      if (response.screen) this.show(response.screen)
    } else {
      this.showFinished(response.status)
    }
  }

  private clearTimer(): void {
    if (this.orientationTimer !== null) {
      clearTimeout(this.orientationTimer)
      this.orientationTimer = null
    }
  }

  private show(screen: ScreenDoc): void {
    this.clearTimer()
    this.speech.stop()
    const doc = this.host.ownerDocument
    const rendered = renderScreen(doc, screen, {
      emit: this.emit,
      onConfirm: () => this.emit('confirm'),
      onAbort: () => this.emit('abort'),
    })
    this.host.replaceChildren(rendered.root)
    this.speech.play(screen.speech_segments, {
      onReveal: (index) => rendered.revealSegment(index),
      onFinished: () => rendered.speechFinished(),
      onFallback: () => console.warn('speech synthesis unavailable; text-only reveal'),
    })
    if (screen.soft_time_limit !== null) {
      // the timer only records; the screen never changes on its own
      this.orientationTimer = setTimeout(() => {
        this.emit('timeout_elapsed')
      }, screen.soft_time_limit * 1000)
    }
  }

  private showFinished(status: 'finished' | 'aborted'): void {
    this.clearTimer()
    this.speech.stop()
    const doc = this.host.ownerDocument
    const done = doc.createElement('div')
    done.setAttribute('data-screen-kind', 'done')
    done.style.fontSize = '30px'
    done.style.color = theme.text
    const text = doc.createElement('p')
    text.textContent =
      status === 'finished'
        ? 'Vielen Dank! Der Test ist abgeschlossen. Bitte geben Sie das Gerät zurück.'
        : 'Der Test wurde beendet. Bitte geben Sie das Gerät zurück.'
    done.appendChild(text)
    this.host.replaceChildren(done)
    if (status === 'finished' && this.sessionId) {
      void this.api
        .getSubjectReport(this.sessionId)
        .then((report) => {
          const summary = doc.createElement('p')
          summary.setAttribute('data-role', 'subject-summary')
          summary.textContent = String(report['text'] ?? '')
          done.appendChild(summary)
        })
        .catch(() => {
          // disclosure off (403): the thank-you text alone is the outcome
        })
    }
  }

  private showUnavailable(): void {
    const doc = this.host.ownerDocument
    const node = doc.createElement('p')
    node.setAttribute('data-role', 'error')
    node.textContent = 'Verbindung unterbrochen. Bitte holen Sie Hilfe.'
    this.host.replaceChildren(node)
  }
}

export function bootstrap(win: Window): void {
  const params = new URLSearchParams(win.location.search)
  const host = win.document.getElementById('app')
  if (!host) return
  win.document.body.style.background = theme.pageBackground
  const app = new App(host, {
    baseUrl: params.get('api') ?? '',
    age: parseInt(params.get('age') ?? '70', 10),
    education: params.get('education') ?? 'secondary',
    seed: params.has('seed') ? parseInt(params.get('seed') as string, 10) : undefined,
  })
  // kiosk: discourage accidental navigation while a session is running
  win.addEventListener('beforeunload', (event) => {
    event.preventDefault()
  })
  void app.start()
}

declare global {
  interface Window {
    __COGSCREEN_TEST__?: boolean
  }
}

if (typeof window !== 'undefined' && !window.__COGSCREEN_TEST__) {
  bootstrap(window)
}
