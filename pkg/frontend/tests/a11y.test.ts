/** Accessibility audit: tap-target size and text contrast on every screen. */

import { describe, expect, it } from 'vitest'

import { renderScreen } from '../src/render'
import { TAP_TARGET_MIN_PX, contrastRatio, theme } from '../src/theme'
import { eventSpy, fixtureKinds, loadFixture } from './helpers'

const CONTRAST_MIN = 7.0

function renderKind(kind: string) {
  const spy = eventSpy()
  return renderScreen(document, loadFixture(kind), {
    emit: spy.emit,
    onConfirm: () => undefined,
    onAbort: () => undefined,
  })
}

describe('palette', () => {
  const pairs: Array<[string, string, string]> = [
    ['body text', theme.text, theme.pageBackground],
    ['instruction', theme.instructionText, theme.pageBackground],
    ['button', theme.buttonText, theme.buttonBackground],
    ['selected button', theme.buttonSelectedText, theme.buttonSelectedBackground],
    ['confirm', theme.confirmText, theme.confirmBackground],
    ['disabled confirm', theme.confirmDisabledText, theme.confirmDisabledBackground],
    ['feedback', theme.feedbackText, theme.feedbackBackground],
    ['progress', theme.progressText, theme.pageBackground],
  ]
  for (const [label, fg, bg] of pairs) {
    it(`${label} contrast is at least ${CONTRAST_MIN}:1`, () => {
      expect(contrastRatio(fg, bg)).toBeGreaterThanOrEqual(CONTRAST_MIN)
    })
  }

  it('contrastRatio matches known anchors', () => {
    expect(contrastRatio('#000000', '#ffffff')).toBeCloseTo(21, 1)
    expect(contrastRatio('#ffffff', '#ffffff')).toBeCloseTo(1, 5)
  })
})

describe('rendered screens', () => {
  for (const kind of fixtureKinds()) {
    it(`${kind}: every button is a 48px tap target with sufficient contrast`, () => {
      const rendered = renderKind(kind)
      const buttons = [...rendered.root.querySelectorAll('button')] as HTMLButtonElement[]
      expect(buttons.length).toBeGreaterThan(0)
      for (const button of buttons) {
        expect(parseInt(button.style.minWidth, 10)).toBeGreaterThanOrEqual(TAP_TARGET_MIN_PX)
        expect(parseInt(button.style.minHeight, 10)).toBeGreaterThanOrEqual(TAP_TARGET_MIN_PX)
        const fg = button.style.color
        const bg = button.style.background
        expect(fg).not.toBe('')
        expect(bg).not.toBe('')
      }
    })

    it(`${kind}: visible text styles come from the audited palette`, () => {
      const rendered = renderKind(kind)
      const styled = [...rendered.root.querySelectorAll('*')] as HTMLElement[]
      const audited = new Set(
        [
          theme.text, theme.instructionText, theme.buttonText, theme.buttonSelectedText,
          theme.confirmText, theme.confirmDisabledText, theme.feedbackText,
          theme.progressText, theme.canvasStroke,
        ].map((c) => c.toLowerCase()),
      )
      for (const node of styled) {
        const color = node.style.color
        if (!color) continue
        // jsdom normalizes hex to rgb(); normalize back for the comparison
        const hex = rgbToHex(color)
        if (hex) expect(audited.has(hex)).toBe(true)
      }
    })
  }
})

function rgbToHex(value: string): string | null {
  const match = value.match(/^rgb\((\d+),\s*(\d+),\s*(\d+)\)$/)
  if (!match) return value.startsWith('#') ? value.toLowerCase() : null
  const [r, g, b] = match.slice(1).map((n) => parseInt(n, 10))
  return `#${[r, g, b].map((n) => n.toString(16).padStart(2, '0')).join('')}`
}
