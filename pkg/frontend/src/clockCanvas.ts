/** Clock-drawing canvas: taps place numbers via a pad below the circle,
 * finger strokes preview as straight lines, every element has its own
 * always-visible confirm button. All coordinates leave this component in
 * canonical form (circle center origin, radius 1, y up).
 */

import { TAP_TARGET_MIN_PX, theme } from './theme'
import { EventDoc, PlacedHand, PlacedNumber, ScreenDoc } from './types'

export interface CanvasGeometry {
  centerX: number
  centerY: number
  radiusPx: number
}

export function pixelToCanonical(px: number, py: number, g: CanvasGeometry): { x: number; y: number } {
  if (g.radiusPx <= 0) throw new Error('canvas radius must be positive')
  return { x: (px - g.centerX) / g.radiusPx, y: (g.centerY - py) / g.radiusPx }
}

export function canonicalToPixel(x: number, y: number, g: CanvasGeometry): { px: number; py: number } {
  if (g.radiusPx <= 0) throw new Error('canvas radius must be positive')
  return { px: g.centerX + x * g.radiusPx, py: g.centerY - y * g.radiusPx }
}

/** The square entry area around the circle accepts input; beyond it, taps
 * are ignored (the subject gets a gentle cue instead of an error). */
export function withinEntryArea(x: number, y: number): boolean {
  return Math.abs(x) <= 1.3 && Math.abs(y) <= 1.3
}

export type EmitEvent = (type: EventDoc['type'], fields?: Partial<EventDoc>) => void

interface PendingNumber {
  x: number
  y: number
  digits: string
}

export class ClockCanvas {
  readonly root: HTMLElement
  private readonly canvas: HTMLCanvasElement
  private readonly context: CanvasRenderingContext2D | null
  private readonly padHost: HTMLElement
  private readonly cueHost: HTMLElement
  private readonly emit: EmitEvent
  private readonly mode: 'numbers' | 'hands'
  private geometry: CanvasGeometry
  private numbers: PlacedNumber[]
  private hands: PlacedHand[]
  private pending: PendingNumber | null = null
  private pendingStroke: { x1: number; y1: number; x2: number; y2: number } | null = null
  private strokeStart: { x: number; y: number } | null = null
  private selectedNumberId: string | null = null

  constructor(doc: Document, screen: ScreenDoc, emit: EmitEvent, sizePx = 360) {
    this.emit = emit
    this.mode = screen.kind === 'clock_hands' ? 'hands' : 'numbers'
    this.numbers = (screen.extra['numbers'] as PlacedNumber[] | undefined) ?? []
    this.hands = (screen.extra['hands'] as PlacedHand[] | undefined) ?? []
    // leave margin beyond the 1.3 entry area so off-area taps are distinguishable
    this.geometry = { centerX: sizePx / 2, centerY: sizePx / 2, radiusPx: sizePx / 2 / 1.45 }

    this.root = doc.createElement('div')
    this.root.setAttribute('data-role', 'clock-canvas')
    this.canvas = doc.createElement('canvas')
    this.canvas.width = sizePx
    this.canvas.height = sizePx
    this.canvas.style.touchAction = 'none'
    this.canvas.style.border = `2px solid ${theme.buttonBorder}`
    this.context = this.canvas.getContext ? this.canvas.getContext('2d') : null
    this.root.appendChild(this.canvas)

    // the number pad and cues live BELOW the circle so the writing hand
    // never covers the clock face
    this.cueHost = doc.createElement('div')
    this.cueHost.setAttribute('data-role', 'clock-cue')
    this.cueHost.style.minHeight = '24px'
    this.cueHost.style.color = theme.feedbackText
    this.root.appendChild(this.cueHost)
    this.padHost = doc.createElement('div')
    this.padHost.setAttribute('data-role', 'number-pad-host')
    this.root.appendChild(this.padHost)

    if (this.mode === 'numbers') {
      this.canvas.addEventListener('pointerdown', (event) => this.onTap(event as PointerEvent))
    } else {
      this.canvas.addEventListener('pointerdown', (event) => this.onStrokeStart(event as PointerEvent))
      this.canvas.addEventListener('pointermove', (event) => this.onStrokeMove(event as PointerEvent))
      this.canvas.addEventListener('pointerup', (event) => this.onStrokeEnd(event as PointerEvent))
    }
    this.redraw()
  }

  private eventPoint(event: PointerEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect()
    return pixelToCanonical(event.clientX - rect.left, event.clientY - rect.top, this.geometry)
  }

  // -- number entry ----------------------------------------------------------

  private onTap(event: PointerEvent): void {
    const point = this.eventPoint(event)
    if (!withinEntryArea(point.x, point.y)) {
      this.cueHost.textContent = 'Bitte tippen Sie in den Bereich der Uhr.'
      return
    }
    this.cueHost.textContent = ''
    const hit = this.hitNumber(point.x, point.y)
    if (this.selectedNumberId && !hit) {
      // relocating a previously selected number by tapping a new spot
      this.emit('number_moved', { element_id: this.selectedNumberId, x: point.x, y: point.y })
      const moved = this.numbers.find((n) => n.id === this.selectedNumberId)
      if (moved) {
        moved.x = point.x
        moved.y = point.y
      }
      this.selectedNumberId = null
      this.redraw()
      return
    }
    if (hit) {
      this.selectedNumberId = hit.id
      this.openPad(hit.value.toString(), hit)
      return
    }
    this.pending = { x: point.x, y: point.y, digits: '' }
    this.emit('clock_tap', { x: point.x, y: point.y })
    this.openPad('')
  }

  hitNumber(x: number, y: number): PlacedNumber | null {
    for (const n of this.numbers) {
      if (Math.hypot(n.x - x, n.y - y) < 0.12) return n
    }
    return null
  }

  private openPad(initial: string, existing?: PlacedNumber): void {
    const doc = this.root.ownerDocument
    this.padHost.textContent = ''
    const pad = doc.createElement('div')
    pad.setAttribute('data-role', 'number-pad')
    const display = doc.createElement('div')
    display.setAttribute('data-role', 'pad-display')
    display.textContent = initial
    display.style.fontSize = '28px'
    display.style.minHeight = '36px'
    display.style.color = theme.text
    pad.appendChild(display)

    let digits = initial
    const setDigits = (value: string) => {
      digits = value
      display.textContent = value
    }

    const grid = doc.createElement('div')
    grid.style.display = 'grid'
    grid.style.gridTemplateColumns = `repeat(3, ${TAP_TARGET_MIN_PX + 24}px)`
    grid.style.gap = '8px'
    for (const label of ['1', '2', '3', '4', '5', '6', '7', '8', '9', '0']) {
      grid.appendChild(
        this.padButton(doc, label, () => {
          if (digits.length < 2) {
            setDigits(digits === '0' ? label : digits + label)
            if (existing === undefined && this.pending) {
              this.pending.digits = digits
            }
            this.emit('number_entered', { value: parseInt(digits, 10) })
          }
        }),
      )
    }
    pad.appendChild(grid)

    const controls = doc.createElement('div')
    controls.style.display = 'flex'
    controls.style.gap = '8px'
    controls.appendChild(
      this.padButton(doc, 'Löschen', () => {
        if (existing) {
          this.emit('number_deleted', { element_id: existing.id })
          this.numbers = this.numbers.filter((n) => n.id !== existing.id)
          this.selectedNumberId = null
          this.closePad()
          this.redraw()
        } else {
          setDigits('')
          this.pending = this.pending ? { ...this.pending, digits: '' } : null
        }
      }),
    )
    controls.appendChild(
      this.padButton(doc, 'Übernehmen', () => {
        if (existing) {
          if (digits && digits !== existing.value.toString()) {
            this.emit('number_deleted', { element_id: existing.id })
            this.numbers = this.numbers.filter((n) => n.id !== existing.id)
            this.emit('clock_tap', { x: existing.x, y: existing.y })
            this.emit('number_entered', { value: parseInt(digits, 10) })
            this.emit('element_confirmed')
            this.numbers.push({ id: `local-${Date.now()}`, value: parseInt(digits, 10), x: existing.x, y: existing.y })
          }
          this.selectedNumberId = null
        } else if (this.pending && digits) {
          this.emit('element_confirmed')
          this.numbers.push({
            id: `local-${this.numbers.length + 1}`,
            value: parseInt(digits, 10),
            x: this.pending.x,
            y: this.pending.y,
          })
          this.pending = null
        }
        this.closePad()
        this.redraw()
      }),
    )
    pad.appendChild(controls)
    this.padHost.appendChild(pad)
  }

  private padButton(doc: Document, label: string, onTap: () => void): HTMLButtonElement {
    const button = doc.createElement('button')
    button.textContent = label
    button.style.minWidth = `${TAP_TARGET_MIN_PX}px`
    button.style.minHeight = `${TAP_TARGET_MIN_PX}px`
    button.style.fontSize = '24px'
    button.style.background = theme.buttonBackground
    button.style.color = theme.buttonText
    button.style.border = `2px solid ${theme.buttonBorder}`
    button.addEventListener('click', onTap)
    return button
  }

  private closePad(): void {
    this.padHost.textContent = ''
  }

  // -- hand strokes ------------------------------------------------------------

  private onStrokeStart(event: PointerEvent): void {
    this.strokeStart = this.eventPoint(event)
  }

  private onStrokeMove(event: PointerEvent): void {
    if (!this.strokeStart) return
    const point = this.eventPoint(event)
    this.pendingStroke = { x1: this.strokeStart.x, y1: this.strokeStart.y, x2: point.x, y2: point.y }
    this.redraw()
  }

  private onStrokeEnd(event: PointerEvent): void {
    if (!this.strokeStart) return
    const point = this.eventPoint(event)
    const stroke = { x1: this.strokeStart.x, y1: this.strokeStart.y, x2: point.x, y2: point.y }
    this.strokeStart = null
    if (stroke.x1 === stroke.x2 && stroke.y1 === stroke.y2) {
      this.pendingStroke = null
      this.redraw()
      return
    }
    this.pendingStroke = stroke
    this.emit('hand_drawn', stroke)
    this.redraw()
    this.offerStrokeConfirm()
  }

  private offerStrokeConfirm(): void {
    const doc = this.root.ownerDocument
    this.padHost.textContent = ''
    const confirm = this.padButton(doc, 'Zeiger übernehmen', () => {
      if (!this.pendingStroke) return
      this.emit('element_confirmed')
      this.hands.push({ id: `local-h${this.hands.length + 1}`, ...this.pendingStroke })
      this.pendingStroke = null
      this.closePad()
      this.redraw()
    })
    confirm.setAttribute('data-role', 'confirm-element')
    this.padHost.appendChild(confirm)
  }

  // -- drawing -------------------------------------------------------------------

  private redraw(): void {
    if (!this.context) return // jsdom: state is still exercised, no pixels
    const ctx = this.context
    const { centerX, centerY, radiusPx } = this.geometry
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height)
    ctx.strokeStyle = theme.canvasStroke
    ctx.lineWidth = 3
    ctx.beginPath()
    ctx.arc(centerX, centerY, radiusPx, 0, Math.PI * 2)
    ctx.stroke()
    ctx.font = '28px sans-serif'
    ctx.fillStyle = theme.text
    ctx.textAlign = 'center'
    ctx.textBaseline = 'middle'
    for (const n of this.numbers) {
      const { px, py } = canonicalToPixel(n.x, n.y, this.geometry)
      ctx.fillText(n.value.toString(), px, py)
    }
    const strokes = this.pendingStroke ? [...this.hands, { id: 'pending', ...this.pendingStroke }] : this.hands
    for (const h of strokes) {
      const a = canonicalToPixel(h.x1, h.y1, this.geometry)
      const b = canonicalToPixel(h.x2, h.y2, this.geometry)
      ctx.beginPath()
      ctx.moveTo(a.px, a.py)
      ctx.lineTo(b.px, b.py)
      ctx.stroke()
    }
  }
}
