/** Palette and sizing for elderly subjects: large targets, high contrast.
 *
 * Every text/background pair used below keeps a contrast ratio of at least
 * 7:1 (WCAG AAA); the accessibility test audits rendered elements against
 * `contrastRatio` and `TAP_TARGET_MIN_PX`.
 */

export const TAP_TARGET_MIN_PX = 48

export const theme = {
  pageBackground: '#ffffff',
  text: '#1a1a1a',
  instructionText: '#1a1a1a',
  buttonBackground: '#ffffff',
  buttonText: '#0d2c54',
  buttonBorder: '#0d2c54',
  buttonSelectedBackground: '#0d2c54',
  buttonSelectedText: '#ffffff',
  confirmBackground: '#0a3d12',
  confirmText: '#ffffff',
  confirmDisabledBackground: '#ffffff',
  confirmDisabledText: '#595959',
  feedbackBackground: '#ffffff',
  feedbackText: '#7a1212',
  progressText: '#3d3d3d',
  canvasStroke: '#1a1a1a',
} as const

function channel(hexPair: string): number {
  const v = parseInt(hexPair, 16) / 255
  return v <= 0.04045 ? v / 12.92 : Math.pow((v + 0.055) / 1.055, 2.4)
}

export function relativeLuminance(hex: string): number {
  const h = hex.replace('#', '')
  return (
    0.2126 * channel(h.slice(0, 2)) +
    0.7152 * channel(h.slice(2, 4)) +
    0.0722 * channel(h.slice(4, 6))
  )
}

export function contrastRatio(fg: string, bg: string): number {
  const a = relativeLuminance(fg)
  const b = relativeLuminance(bg)
  const [hi, lo] = a >= b ? [a, b] : [b, a]
  return (hi + 0.05) / (lo + 0.05)
}
