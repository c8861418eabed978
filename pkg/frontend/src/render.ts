/** DOM rendering for every screen kind.
 *
 * Design constraints for elderly subjects: every tap target is at least
 * 48 px, every text/background pair keeps at least 7:1 contrast, a progress
 * indicator is always visible, and every choice screen has one global
 * confirm button that stays disabled until the selection rule is met.
 */

import { ClockCanvas, EmitEvent } from './clockCanvas'
import { TAP_TARGET_MIN_PX, theme } from './theme'
import { ScreenDoc, SpeechSegment } from './types'
import { ScreenViewModel } from './viewmodel'

export interface RenderHandlers {
  emit: EmitEvent
  onConfirm: () => void
  onAbort: () => void
}

export interface RenderedScreen {
  root: HTMLElement
  viewModel: ScreenViewModel | null
  /** reveal one speech segment's text (wired to the SpeechPlayer) */
  revealSegment: (index: number) => void
  /** called when speech playback finished; may enable confirm */
  speechFinished: () => void
}

function baseButton(doc: Document, label: string): HTMLButtonElement {
  const button = doc.createElement('button')
  button.textContent = label
  button.style.minWidth = `${TAP_TARGET_MIN_PX}px`
  button.style.minHeight = `${TAP_TARGET_MIN_PX}px`
  button.style.fontSize = '24px'
  button.style.padding = '8px 20px'
  button.style.background = theme.buttonBackground
  button.style.color = theme.buttonText
  button.style.border = `3px solid ${theme.buttonBorder}`
  button.style.borderRadius = '10px'
  return button
}

function setSelected(button: HTMLButtonElement, selected: boolean): void {
  button.style.background = selected ? theme.buttonSelectedBackground : theme.buttonBackground
  button.style.color = selected ? theme.buttonSelectedText : theme.buttonText
  button.setAttribute('aria-pressed', selected ? 'true' : 'false')
}

function setConfirmEnabled(button: HTMLButtonElement, enabled: boolean): void {
  button.disabled = !enabled
  button.style.background = enabled ? theme.confirmBackground : theme.confirmDisabledBackground
  button.style.color = enabled ? theme.confirmText : theme.confirmDisabledText
  button.style.border = `3px solid ${enabled ? theme.confirmBackground : theme.confirmDisabledText}`
}

export function renderScreen(doc: Document, screen: ScreenDoc, handlers: RenderHandlers): RenderedScreen {
  const root = doc.createElement('div')
  root.setAttribute('data-screen-kind', screen.kind)
  root.style.background = theme.pageBackground
  root.style.color = theme.text
  root.style.fontSize = '26px'
  root.style.maxWidth = '760px'
  root.style.margin = '0 auto'
  root.style.padding = '16px'

  // persistent progress indicator
  const progress = doc.createElement('div')
  progress.setAttribute('data-role', 'progress')
  progress.style.color = theme.progressText
  progress.style.fontSize = '20px'
  progress.textContent = `Schritt ${screen.progress.current} von ${screen.progress.total}`
  root.appendChild(progress)

  const instruction = doc.createElement('p')
  instruction.setAttribute('data-role', 'instruction')
  instruction.style.color = theme.instructionText
  instruction.style.fontSize = '30px'
  instruction.textContent = screen.instruction
  root.appendChild(instruction)

  if (screen.feedback) {
    const feedback = doc.createElement('p')
    feedback.setAttribute('data-role', 'feedback')
    feedback.style.color = theme.feedbackText
    feedback.style.background = theme.feedbackBackground
    feedback.style.border = `3px solid ${theme.feedbackText}`
    feedback.style.padding = '8px'
    feedback.textContent = screen.feedback
    root.appendChild(feedback)
  }

  const speechHost = doc.createElement('div')
  speechHost.setAttribute('data-role', 'speech-text')
  root.appendChild(speechHost)
  const segmentNodes: HTMLElement[] = screen.speech_segments.map((segment: SpeechSegment) => {
    const node = doc.createElement('p')
    node.textContent = segment.text
    node.style.visibility = 'hidden' // revealed in step with the voice
    node.style.fontSize = '30px'
    speechHost.appendChild(node)
    return node
  })

  const known = new Set([
    'consent', 'volume_check', 'environment_state', 'orientation_question',
    'word_presentation', 'word_selection', 'clock_numbers', 'clock_hands',
    'delayed_recall', 'story_presentation', 'story_step',
  ])
  if (!known.has(screen.kind)) {
    return renderUnknownKind(doc, root, screen, handlers)
  }

  const viewModel = new ScreenViewModel(screen)
  const confirm = baseButton(doc, 'Weiter')
  confirm.setAttribute('data-role', 'confirm')
  confirm.style.marginTop = '20px'
  confirm.style.width = '100%'

  // presentation screens hold confirm until the speech has played out
  let speechDone = screen.speech_segments.length === 0 || screen.input_mode !== 'none'
  const refreshConfirm = () => {
    setConfirmEnabled(confirm, viewModel.canConfirm() && speechDone)
  }

  if (screen.kind === 'consent') {
    root.appendChild(renderQuestionGroups(doc, screen, viewModel, refreshConfirm, handlers, 'select'))
  } else if (screen.kind === 'environment_state') {
    root.appendChild(renderQuestionGroups(doc, screen, viewModel, refreshConfirm, handlers, 'answer_environment'))
  } else if (screen.kind === 'volume_check') {
    root.appendChild(renderVolumeHint(doc))
  } else if (screen.input_mode === 'buttons' && screen.options.length > 0) {
    root.appendChild(renderOptionGrid(doc, screen, viewModel, refreshConfirm, handlers))
  } else if (screen.input_mode === 'clock_canvas') {
    const canvas = new ClockCanvas(doc, screen, handlers.emit)
    root.appendChild(canvas.root)
  }

  if (screen.kind === 'word_presentation') {
    const words = (screen.extra['words_shown'] as string[] | undefined) ?? []
    const list = doc.createElement('div')
    list.setAttribute('data-role', 'word-list')
    list.style.fontSize = '34px'
    list.style.fontWeight = 'bold'
    words.forEach((word, index) => {
      const node = doc.createElement('p')
      node.textContent = word
      node.style.visibility = 'hidden'
      list.appendChild(node)
      // reveal rides on the matching speech segment
      const segmentNode = segmentNodes[index]
      if (segmentNode) segmentNode.style.display = 'none'
      segmentNodes[index] = node
    })
    root.appendChild(list)
  }

  if (screen.kind === 'story_step') {
    const soFar = (screen.extra['story_so_far'] as string[] | undefined) ?? []
    const answer = doc.createElement('p')
    answer.setAttribute('data-role', 'story-so-far')
    answer.style.fontStyle = 'italic'
    answer.textContent = soFar.join(' ')
    root.insertBefore(answer, speechHost)
  }

  root.appendChild(confirm)
  confirm.addEventListener('click', () => {
    if (!confirm.disabled) handlers.onConfirm()
  })

  const abort = baseButton(doc, 'Test beenden')
  abort.setAttribute('data-role', 'abort')
  abort.style.marginTop = '12px'
  abort.addEventListener('click', handlers.onAbort)
  root.appendChild(abort)

  refreshConfirm()
  return {
    root,
    viewModel,
    revealSegment: (index: number) => {
      const node = segmentNodes[index]
      if (node) node.style.visibility = 'visible'
    },
    speechFinished: () => {
      speechDone = true
      refreshConfirm()
    },
  }
}

function renderOptionGrid(
  doc: Document,
  screen: ScreenDoc,
  viewModel: ScreenViewModel,
  refreshConfirm: () => void,
  handlers: RenderHandlers,
): HTMLElement {
  const grid = doc.createElement('div')
  grid.setAttribute('data-role', 'options')
  grid.style.display = 'grid'
  const columns = screen.options.length > 12 ? 4 : screen.options.length > 7 ? 3 : 2
  grid.style.gridTemplateColumns = `repeat(${columns}, 1fr)`
  grid.style.gap = '12px'
  const buttons = new Map<string, HTMLButtonElement>()
  for (const option of screen.options) {
    const button = baseButton(doc, option.text)
    button.setAttribute('data-option-id', option.id)
    setSelected(button, viewModel.isSelected(option.id))
    button.addEventListener('click', () => {
      for (const change of viewModel.tap(option.id)) {
        handlers.emit(change.type, { option_id: change.optionId })
      }
      for (const [id, node] of buttons) setSelected(node, viewModel.isSelected(id))
      refreshConfirm()
    })
    buttons.set(option.id, button)
    grid.appendChild(button)
  }
  return grid
}

interface QuestionRef {
  id: string
  text: string
}

function renderQuestionGroups(
  doc: Document,
  screen: ScreenDoc,
  viewModel: ScreenViewModel,
  refreshConfirm: () => void,
  handlers: RenderHandlers,
  wire: 'select' | 'answer_environment',
): HTMLElement {
  const host = doc.createElement('div')
  host.setAttribute('data-role', 'questions')
  const labels = (screen.extra['answer_labels'] as { yes: string; no: string } | undefined) ?? {
    yes: 'Ja',
    no: 'Nein',
  }
  const questions = (screen.extra['questions'] as QuestionRef[] | undefined) ?? []
  for (const question of questions) {
    const row = doc.createElement('div')
    row.style.margin = '14px 0'
    const text = doc.createElement('p')
    text.textContent = question.text
    row.appendChild(text)
    const pair = doc.createElement('div')
    pair.style.display = 'flex'
    pair.style.gap = '12px'
    const buttons = new Map<string, HTMLButtonElement>()
    for (const answer of ['yes', 'no'] as const) {
      const button = baseButton(doc, answer === 'yes' ? labels.yes : labels.no)
      const optionId = `${question.id}:${answer}`
      button.setAttribute('data-option-id', optionId)
      const selectedNow =
        wire === 'select'
          ? viewModel.isSelected(optionId)
          : viewModel.environmentAnswer(question.id) === answer
      setSelected(button, selectedNow)
      button.addEventListener('click', () => {
        if (wire === 'select') {
          for (const change of viewModel.tap(optionId)) {
            handlers.emit(change.type, { option_id: change.optionId })
          }
        } else {
          viewModel.answerEnvironment(question.id, answer)
          handlers.emit('answer_environment', { question_id: question.id, answer })
        }
        for (const [id, node] of buttons) {
          const isSelected =
            wire === 'select'
              ? viewModel.isSelected(id)
              : id === `${question.id}:${viewModel.environmentAnswer(question.id)}`
          setSelected(node, isSelected)
        }
        refreshConfirm()
      })
      buttons.set(optionId, button)
      pair.appendChild(button)
    }
    row.appendChild(pair)
    host.appendChild(row)
  }
  return host
}

function renderVolumeHint(doc: Document): HTMLElement {
  // arrows pointing toward the device's physical volume buttons
  const hint = doc.createElement('div')
  hint.setAttribute('data-role', 'volume-hint')
  hint.style.fontSize = '44px'
  hint.style.textAlign = 'right'
  hint.textContent = '🔊 ⬆⬆'
  const caption = doc.createElement('p')
  caption.textContent = 'Die Lautstärketasten befinden sich am Rand des Geräts.'
  hint.appendChild(caption)
  return hint
}

function renderUnknownKind(
  doc: Document,
  root: HTMLElement,
  screen: ScreenDoc,
  handlers: RenderHandlers,
): RenderedScreen {
  const message = doc.createElement('p')
  message.setAttribute('data-role', 'error')
  message.style.color = theme.feedbackText
  message.textContent = 'Dieser Schritt kann nicht angezeigt werden. Bitte holen Sie Hilfe.'
  root.appendChild(message)
  const abort = baseButton(doc, 'Test beenden')
  abort.setAttribute('data-role', 'abort')
  abort.addEventListener('click', handlers.onAbort)
  root.appendChild(abort)
  return { root, viewModel: null, revealSegment: () => undefined, speechFinished: () => undefined }
}
