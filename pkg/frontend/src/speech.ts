/** Step-synced speech playback with a timed text-only fallback.
 *
 * Each segment's text is revealed at its `display_at` offset, so text and
 * voice stay in step. With working speech synthesis the reveal rides on the
 * utterance start; without it the same schedule runs on timers, which keeps
 * the pacing identical (the offsets were computed from the utterance-length
 * model server-side).
 */

import { SpeechSegment } from './types'

export interface SpeechPolicy {
  rate: number // platform scale where 0.5 is normal speed
  interUtterancePause: number
}

export const DEFAULT_POLICY: SpeechPolicy = { rate: 0.4, interUtterancePause: 0.5 }

export interface SpeechHooks {
  onReveal: (index: number, segment: SpeechSegment) => void
  onFinished: () => void
  onFallback?: () => void
}

type TimerHandle = ReturnType<typeof setTimeout>

/** Minimal stand-in so injected synthesis stubs work off-browser. */
class PlainUtterance {
  rate = 1
  onend: (() => void) | null = null
  constructor(readonly text: string) {}
}

function makeUtterance(text: string): SpeechSynthesisUtterance {
  if (typeof SpeechSynthesisUtterance !== 'undefined') {
    return new SpeechSynthesisUtterance(text)
  }
  return new PlainUtterance(text) as unknown as SpeechSynthesisUtterance
}

export class SpeechPlayer {
  private readonly synthesis: SpeechSynthesis | null
  private timers: TimerHandle[] = []
  private cancelled = false

  constructor(synthesis?: SpeechSynthesis | null) {
    this.synthesis =
      synthesis !== undefined
        ? synthesis
        : typeof window !== 'undefined' && 'speechSynthesis' in window
          ? window.speechSynthesis
          : null
  }

  get usingSynthesis(): boolean {
    return this.synthesis !== null
  }

  play(segments: SpeechSegment[], hooks: SpeechHooks, policy: SpeechPolicy = DEFAULT_POLICY): void {
    this.stop()
    this.cancelled = false
    if (segments.length === 0) {
      hooks.onFinished()
      return
    }
    if (this.synthesis === null && hooks.onFallback) {
      hooks.onFallback()
    }

    const lastIndex = segments.length - 1
    segments.forEach((segment, index) => {
      const timer = setTimeout(() => {
        if (this.cancelled) return
        hooks.onReveal(index, segment)
        if (this.synthesis) {
          const utterance = makeUtterance(segment.text)
          // SpeechSynthesisUtterance treats 1.0 as normal; the policy scale
          // treats 0.5 as normal.
          utterance.rate = policy.rate * 2
          if (index === lastIndex) {
            utterance.onend = () => {
              if (!this.cancelled) hooks.onFinished()
            }
            // some engines drop onend; keep a timer as the safety net
            const fallbackEnd = setTimeout(() => {
              if (!this.cancelled) hooks.onFinished()
            }, this.estimateMs(segment, policy) + 2000)
            this.timers.push(fallbackEnd)
          }
          this.synthesis.speak(utterance)
        } else if (index === lastIndex) {
          const doneTimer = setTimeout(() => {
            if (!this.cancelled) hooks.onFinished()
          }, this.estimateMs(segment, policy))
          this.timers.push(doneTimer)
        }
      }, segment.display_at * 1000)
      this.timers.push(timer)
    })
  }

  private estimateMs(segment: SpeechSegment, policy: SpeechPolicy): number {
    const charsPerSecond = 12 * (policy.rate / 0.5)
    const seconds = Math.max(0.6, segment.text.length / charsPerSecond)
    return (seconds + policy.interUtterancePause) * 1000
  }

  stop(): void {
    this.cancelled = true
    for (const timer of this.timers) clearTimeout(timer)
    this.timers = []
    if (this.synthesis) this.synthesis.cancel()
  }
}
